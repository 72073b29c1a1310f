use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{rational_to_f64, MultiIndex, QPoly};
use crate::error::{Error, Result};

/// Exact value `coeff · π^pi_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiRational {
    pub coeff: BigRational,
    pub pi_power: u32,
}

impl PiRational {
    pub fn zero(pi_power: u32) -> Self {
        PiRational {
            coeff: BigRational::zero(),
            pi_power,
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.coeff) * PI.powi(self.pi_power as i32)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        PiRational {
            coeff: &self.coeff * c,
            pi_power: self.pi_power,
        }
    }

    fn add(&self, other: &PiRational) -> Self {
        debug_assert!(self.coeff.is_zero() || other.coeff.is_zero() || self.pi_power == other.pi_power);
        PiRational {
            coeff: &self.coeff + &other.coeff,
            pi_power: self.pi_power.max(other.pi_power),
        }
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "({})·π", self.coeff),
            k => write!(f, "({})·π^{}", self.coeff, k),
        }
    }
}

impl Serialize for PiRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PiRational", 3)?;
        st.serialize_field("coeff", &self.coeff.to_string())?;
        st.serialize_field("pi_power", &self.pi_power)?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `Γ(t/2)` as `(rational, carries √π)`.
fn gamma_half(t: u32) -> (BigRational, bool) {
    debug_assert!(t > 0);
    if t % 2 == 0 {
        (BigRational::from_integer(factorial(t / 2 - 1)), false)
    } else {
        // Γ(k + 1/2) = (2k)! / (4^k k!) √π
        let k = (t - 1) / 2;
        let num = factorial(2 * k);
        let den = BigInt::from(4).pow(k) * factorial(k);
        (BigRational::new(num, den), true)
    }
}

/// `∫_{S^{n−1}} x^α dS`.
pub fn sphere_integral_monomial(alpha: &MultiIndex, n: usize) -> Result<PiRational> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "sphere integrals need n >= 2, got {n}"
        )));
    }
    if alpha.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: alpha.dim(),
        });
    }
    let pi_power = (n / 2) as u32;
    if alpha.0.iter().any(|a| a % 2 == 1) {
        return Ok(PiRational::zero(pi_power));
    }
    // 2 Π Γ(β_i) / Γ(Σ β_i), β_i = (α_i + 1)/2
    let mut num = BigRational::from_integer(BigInt::from(2));
    let mut roots = 0u32;
    for &a in &alpha.0 {
        let (g, r) = gamma_half(a + 1);
        num *= g;
        roots += r as u32;
    }
    let (den, r) = gamma_half(alpha.degree() + n as u32);
    roots -= r as u32;
    debug_assert_eq!(roots % 2, 0);
    debug_assert_eq!(roots / 2, pi_power);
    Ok(PiRational {
        coeff: num / den,
        pi_power,
    })
}

/// `∫_{B_1} x^α dx = (∫_{S^{n−1}} x^α) / (|α| + n)`.
pub fn ball_integral_monomial(alpha: &MultiIndex, n: usize) -> Result<PiRational> {
    let s = sphere_integral_monomial(alpha, n)?;
    Ok(s.scale(&BigRational::new(
        BigInt::one(),
        BigInt::from(alpha.degree() + n as u32),
    )))
}

pub fn sphere_integral(p: &QPoly) -> Result<PiRational> {
    let n = p.dim();
    p.terms().try_fold(PiRational::zero((n / 2) as u32), |acc, (a, c)| {
        Ok(acc.add(&sphere_integral_monomial(a, n)?.scale(c)))
    })
}

pub fn ball_integral(p: &QPoly) -> Result<PiRational> {
    let n = p.dim();
    p.terms().try_fold(PiRational::zero((n / 2) as u32), |acc, (a, c)| {
        Ok(acc.add(&ball_integral_monomial(a, n)?.scale(c)))
    })
}

/// `∫_{S^{n−1}} p² dS`.
pub fn sphere_l2(p: &QPoly) -> Result<PiRational> {
    sphere_integral(&(p * p))
}
