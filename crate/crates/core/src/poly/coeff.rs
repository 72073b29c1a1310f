use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient ring for [`MultiPoly`](super::MultiPoly).
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(v: i64) -> Self;

    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    /// Sign and magnitude text for printing. Complex values never report negative.
    fn split_sign(&self) -> (bool, String);

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

impl Coeff for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }

    fn split_sign(&self) -> (bool, String) {
        (self.is_negative(), self.abs().to_string())
    }
}

impl Coeff for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn split_sign(&self) -> (bool, String) {
        (self.is_sign_negative() && *self != 0.0, format!("{:e}", self.abs()))
    }
}

impl Coeff for Complex<BigRational> {
    fn from_int(v: i64) -> Self {
        Complex::new(BigRational::from_int(v), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(BigRational::from_ratio(num, den), BigRational::zero())
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(&self.re)
    }

    fn split_sign(&self) -> (bool, String) {
        if self.im.is_zero() {
            return self.re.split_sign();
        }
        let (neg, mag) = self.im.split_sign();
        let sign = if neg { '-' } else { '+' };
        (false, format!("({} {} {}i)", self.re, sign, mag))
    }
}

/// Rational to float without overflow for large numerators/denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = q.numer().bits().max(q.denom().bits()) as i64 - 60;
    let (n, d) = if shift > 0 {
        (q.numer() >> shift as usize, q.denom() >> shift as usize)
    } else {
        (q.numer().clone(), q.denom().clone())
    };
    let d = d.to_f64().unwrap_or(f64::INFINITY);
    if d == 0.0 {
        return if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    n.to_f64().unwrap_or(0.0) / d
}

/// Best rational with bounded denominator, used when a float must re-enter exact paths.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::from_ratio(num, den)
}
