//! Sparse multivariate polynomials with exact or floating coefficients.

mod coeff;
mod integrate;
mod leading;
mod parse;
pub mod random;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coeff::{f64_to_rational, rat, rational_to_f64, Coeff};
pub use integrate::{
    ball_integral, ball_integral_monomial, sphere_integral, sphere_integral_monomial, sphere_l2,
    PiRational,
};
pub use leading::{leading_part, leading_part_sampled, sphere_points, LeadingFit, LeadingFitConfig};
pub use parse::parse_poly;

pub type QPoly = MultiPoly<BigRational>;
pub type FPoly = MultiPoly<f64>;
pub type CQPoly = MultiPoly<Complex<BigRational>>;

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut a = vec![0; n];
        a[i] = 1;
        MultiIndex(a)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All exponent vectors in `n` variables of total degree exactly `d`, ascending.
    pub fn of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if n == 1 {
                prefix.push(d);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in 0..=d {
                prefix.push(a);
                rec(n - 1, d - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
        out.sort();
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `dim` variables. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<C: Coeff> {
    dim: usize,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    /// The coordinate function `x_{i+1}`.
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, i), C::one())
    }

    pub fn monomial(alpha: MultiIndex, c: C) -> Self {
        let mut p = Self::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// `|x|^2`.
    pub fn radius_squared(dim: usize) -> Self {
        (0..dim).fold(Self::zero(dim), |acc, i| {
            let mut a = MultiIndex::zero(dim);
            a.0[i] = 2;
            acc + Self::monomial(a, C::one())
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Maximal total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::degree)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::degree)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: C) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, v) in &self.terms {
            p.add_term(a.clone(), v.clone() * c.clone());
        }
        p
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut p = MultiPoly::zero(self.dim);
        for (a, v) in &self.terms {
            p.add_term(a.clone(), f(v));
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `∂p/∂x_{i+1}`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, v) in &self.terms {
            let e = a.0[i];
            if e == 0 {
                continue;
            }
            let mut b = a.clone();
            b.0[i] -= 1;
            p.add_term(b, v.clone() * C::from_int(e as i64));
        }
        p
    }

    pub fn derivative_n(&self, i: usize, k: u32) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative(i))
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim).map(|i| self.derivative(i)).collect()
    }

    pub fn laplacian(&self) -> Self {
        self.partial_laplacian(0..self.dim)
    }

    /// Laplacian in the listed variables only.
    pub fn partial_laplacian(&self, vars: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::zero(self.dim);
        for i in vars {
            for (a, v) in &self.terms {
                let e = a.0[i];
                if e < 2 {
                    continue;
                }
                let mut b = a.clone();
                b.0[i] -= 2;
                p.add_term(b, v.clone() * C::from_int((e * (e - 1)) as i64));
            }
        }
        p
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }

    pub fn is_homogeneous(&self, k: u32) -> bool {
        self.terms.keys().all(|a| a.degree() == k)
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, v) in self.terms.iter().filter(|(a, _)| a.degree() == k) {
            p.add_term(a.clone(), v.clone());
        }
        p
    }

    pub fn decompose(&self) -> HomogeneousDecomp<C> {
        let mut parts: Vec<(u32, Self)> = Vec::new();
        for (a, v) in &self.terms {
            let d = a.degree();
            match parts.last_mut() {
                Some((k, p)) if *k == d => p.add_term(a.clone(), v.clone()),
                _ => parts.push((d, Self::monomial(a.clone(), v.clone()))),
            }
        }
        HomogeneousDecomp {
            dim: self.dim,
            parts,
        }
    }

    pub fn eval(&self, x: &[C]) -> C {
        assert_eq!(x.len(), self.dim, "evaluation point has wrong dimension");
        self.terms.iter().fold(C::zero(), |acc, (a, v)| {
            let mono = a
                .0
                .iter()
                .zip(x)
                .fold(C::one(), |m, (&e, xi)| (0..e).fold(m, |m, _| m * xi.clone()));
            acc + v.clone() * mono
        })
    }

    /// Substitutes `x_{i+1} ↦ subs[i]`; the result lives in the dimension of `subs`.
    pub fn compose(&self, subs: &[MultiPoly<C>]) -> Result<MultiPoly<C>> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: subs.len(),
            });
        }
        let target = subs.first().map_or(0, |s| s.dim);
        if subs.iter().any(|s| s.dim != target) {
            return Err(Error::InvalidArgument(
                "substituted polynomials must share a dimension".into(),
            ));
        }
        let maxdeg: Vec<u32> = (0..self.dim)
            .map(|i| self.terms.keys().map(|a| a.0[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<MultiPoly<C>>> = subs
            .iter()
            .zip(&maxdeg)
            .map(|(s, &d)| {
                let mut v = vec![MultiPoly::one(target)];
                for k in 1..=d as usize {
                    let next = &v[k - 1] * s;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = MultiPoly::zero(target);
        for (a, v) in &self.terms {
            let mut t = MultiPoly::constant(target, v.clone());
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = out + t;
        }
        Ok(out)
    }

    /// `x ↦ p(Mx)` for a square matrix given row-wise.
    pub fn linear_substitute(&self, m: &[Vec<C>]) -> Result<Self> {
        let subs: Vec<MultiPoly<C>> = m
            .iter()
            .map(|row| {
                if row.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        found: row.len(),
                    });
                }
                Ok(row.iter().enumerate().fold(MultiPoly::zero(self.dim), |acc, (j, c)| {
                    acc + MultiPoly::var(self.dim, j).scale(c)
                }))
            })
            .collect::<Result<_>>()?;
        self.compose(&subs)
    }

    /// `x ↦ p(x + c)`.
    pub fn translate(&self, c: &[C]) -> Result<Self> {
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: c.len(),
            });
        }
        let subs: Vec<MultiPoly<C>> = (0..self.dim)
            .map(|i| MultiPoly::var(self.dim, i) + MultiPoly::constant(self.dim, c[i].clone()))
            .collect();
        self.compose(&subs)
    }

    /// Sets `x_{i+1} = value`, keeping the variable slot.
    pub fn restrict(&self, i: usize, value: &C) -> Self {
        let mut p = Self::zero(self.dim);
        for (a, v) in &self.terms {
            let mut b = a.clone();
            let e = std::mem::replace(&mut b.0[i], 0);
            let f = (0..e).fold(v.clone(), |acc, _| acc * value.clone());
            p.add_term(b, f);
        }
        p
    }

    /// Reinterprets in `dim` variables: drops trailing unused variables or appends new ones.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (a, v) in &self.terms {
            if a.0[dim.min(self.dim)..].iter().any(|&e| e > 0) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: self.dim,
                });
            }
            let mut b = vec![0; dim];
            let k = dim.min(self.dim);
            b[..k].copy_from_slice(&a.0[..k]);
            p.add_term(MultiIndex(b), v.clone());
        }
        Ok(p)
    }

    pub fn to_f64(&self) -> FPoly {
        self.map_coeffs(|c| c.to_f64_lossy())
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut p = self.clone();
        for (a, v) in &other.terms {
            let v = if negate { -v.clone() } else { v.clone() };
            p.add_term(a.clone(), v);
        }
        p
    }
}

impl QPoly {
    /// Harmonic part of a homogeneous polynomial: `p − |x|² q` harmonic with `q` polynomial.
    pub fn harmonic_projection(&self) -> Result<QPoly> {
        let Some(m) = self.degree() else {
            return Ok(self.clone());
        };
        if !self.is_homogeneous(m) {
            return Err(Error::NotHomogeneous(m));
        }
        let n = self.dim as i64;
        let r2 = QPoly::radius_squared(self.dim);
        let mut out = self.clone();
        let mut lap = self.clone();
        let mut r2j = QPoly::one(self.dim);
        let mut denom = BigRational::one();
        for j in 1..=(m / 2) as i64 {
            lap = lap.laplacian();
            r2j = &r2j * &r2;
            let factor = n + 2 * m as i64 - 2 - 2 * j;
            denom = denom * BigRational::from_int(-2 * j * factor);
            let a = BigRational::one() / denom.clone();
            out = out + (&r2j * &lap).scale(&a);
        }
        debug_assert!(out.is_harmonic());
        Ok(out)
    }
}

impl CQPoly {
    /// Real part as a rational polynomial; fails if any coefficient is not real.
    pub fn into_real(&self) -> Result<QPoly> {
        if self.terms.values().any(|c| !c.im.is_zero()) {
            return Err(Error::InvalidArgument(
                "polynomial has non-real coefficients".into(),
            ));
        }
        Ok(self.map_coeffs(|c| c.re.clone()))
    }

    pub fn from_real(p: &QPoly) -> CQPoly {
        p.map_coeffs(|c| Complex::new(c.clone(), BigRational::zero()))
    }
}

impl FPoly {
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .map(|(a, v)| {
                v * a
                    .0
                    .iter()
                    .zip(x)
                    .map(|(&e, xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl<C: Coeff> Add for MultiPoly<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.combine(&rhs, false)
    }
}

impl<C: Coeff> Sub for MultiPoly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.combine(&rhs, true)
    }
}

impl<C: Coeff> Add for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: Self) -> MultiPoly<C> {
        self.combine(rhs, false)
    }
}

impl<C: Coeff> Sub for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, rhs: Self) -> MultiPoly<C> {
        self.combine(rhs, true)
    }
}

impl<C: Coeff> Neg for MultiPoly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> Mul for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: Self) -> MultiPoly<C> {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut p = MultiPoly::zero(self.dim);
        for (a, u) in &self.terms {
            for (b, v) in &rhs.terms {
                p.add_term(a.add(b), u.clone() * v.clone());
            }
        }
        p
    }
}

impl<C: Coeff> Mul for MultiPoly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<C: Coeff> fmt::Display for MultiPoly<C> {
    /// Highest degree first: `3/2 * x1^2 x2 - x3 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (a, c)) in self.terms.iter().rev().enumerate() {
            let (neg, mag) = c.split_sign();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let vars: Vec<String> = a
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            let unit = mag == "1";
            match (vars.is_empty(), unit) {
                (true, _) => f.write_str(&mag)?,
                (false, true) => f.write_str(&vars.join(" "))?,
                (false, false) => write!(f, "{} * {}", mag, vars.join(" "))?,
            }
        }
        Ok(())
    }
}

/// Split of a polynomial into homogeneous parts, ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousDecomp<C: Coeff> {
    pub dim: usize,
    pub parts: Vec<(u32, MultiPoly<C>)>,
}

impl<C: Coeff> HomogeneousDecomp<C> {
    pub fn reassemble(&self) -> MultiPoly<C> {
        self.parts
            .iter()
            .fold(MultiPoly::zero(self.dim), |acc, (_, p)| acc + p.clone())
    }

    pub fn part(&self, k: u32) -> Option<&MultiPoly<C>> {
        self.parts.iter().find(|(d, _)| *d == k).map(|(_, p)| p)
    }
}

/// Shorthand used across the crate for `c · x^alpha` in `n` variables.
pub fn qmono(alpha: &[u32], num: i64, den: i64) -> QPoly {
    QPoly::monomial(MultiIndex(alpha.to_vec()), rat(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> QPoly {
        parse_poly(s, Some(n)).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(p("1/2 * x1 x2^2", 2).laplacian(), p("x1", 2));
        assert!(p("x1^2 - x2^2", 2).laplacian().is_zero());
        let prod = &QPoly::radius_squared(2) * &p("x1^2 - x2^2", 2);
        assert_eq!(prod.laplacian(), p("12 * x1^2 - 12 * x2^2", 2));
    }

    #[test]
    fn harmonic_examples() {
        let z = CQPoly::var(2, 0)
            + CQPoly::var(2, 1).scale(&Complex::new(rat(0, 1), rat(1, 1)));
        let re = z.pow(3).map_coeffs(|c| c.re.clone());
        assert_eq!(re, p("x1^3 - 3 * x1 x2^2", 2));
        assert!(re.is_harmonic());
        assert!(!QPoly::radius_squared(2).is_harmonic());
        assert!(p("2 * x1 + 6 * x2", 2).is_harmonic());
    }

    #[test]
    fn graded_lex_order() {
        let a = MultiIndex(vec![2, 0]);
        let b = MultiIndex(vec![0, 3]);
        let c = MultiIndex(vec![1, 1]);
        assert!(a > c && b > a);
        assert_eq!(MultiIndex::of_degree(3, 2).len(), 6);
    }

    #[test]
    fn decomposition_splits_and_reassembles() {
        let q = p("x1 + x1^3 - 2/3 * x2^2 + 5", 2);
        let d = q.decompose();
        assert_eq!(d.parts.iter().map(|(k, _)| *k).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(d.reassemble(), q);
        assert_eq!(d.part(1), Some(&p("x1", 2)));
    }

    #[test]
    fn compose_translate_restrict() {
        let q = p("x1^2 x2", 2);
        let t = q.translate(&[rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(t, p("x1^2 x2 + 2 * x1 x2 + x2", 2));
        assert_eq!(q.restrict(1, &rat(0, 1)), QPoly::zero(2));
        let swapped = q
            .linear_substitute(&[vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]])
            .unwrap();
        assert_eq!(swapped, p("x1 x2^2", 2));
        assert_eq!(q.with_dim(3).unwrap().dim(), 3);
        assert!(p("x3", 3).with_dim(2).is_err());
    }

    #[test]
    fn projection_of_square_is_harmonic() {
        let h = p("x1^2", 2).harmonic_projection().unwrap();
        assert_eq!(h, p("1/2 * x1^2 - 1/2 * x2^2", 2));
    }

    #[test]
    fn radial_factor_laplacian_identity() {
        // Δ(|x|² H) = 2(2m + n) H for harmonic homogeneous H
        let mut rng = random::seeded(7);
        for n in 2..=4 {
            for m in 0..=6 {
                let h = random::harmonic(&mut rng, n, m);
                let lhs = (&QPoly::radius_squared(n) * &h).laplacian();
                let rhs = h.scale(&rat(2 * (2 * m as i64 + n as i64), 1));
                assert_eq!(lhs, rhs, "n={n} m={m}");
            }
        }
    }

    proptest! {
        #[test]
        fn laplacian_is_linear(seed in any::<u64>(), a in -20i64..20, b in -20i64..20) {
            let mut rng = random::seeded(seed);
            let p1 = random::polynomial(&mut rng, 3, 4);
            let p2 = random::polynomial(&mut rng, 3, 4);
            let lhs = (p1.scale(&rat(a, 3)) + p2.scale(&rat(b, 7))).laplacian();
            let rhs = p1.laplacian().scale(&rat(a, 3)) + p2.laplacian().scale(&rat(b, 7));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn decomposition_round_trips(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = random::seeded(seed);
            let q = random::polynomial(&mut rng, n, 5);
            let d = q.decompose();
            for (k, part) in &d.parts {
                prop_assert!(part.is_homogeneous(*k));
            }
            prop_assert_eq!(d.reassemble(), q);
        }

        #[test]
        fn projection_is_harmonic(seed in any::<u64>(), n in 2usize..5, m in 0u32..7) {
            let mut rng = random::seeded(seed);
            let h = random::homogeneous(&mut rng, n, m).harmonic_projection().unwrap();
            prop_assert!(h.is_harmonic());
            prop_assert!(h.is_homogeneous(m) || h.is_zero());
        }
    }
}
