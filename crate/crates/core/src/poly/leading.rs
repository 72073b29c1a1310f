use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{FPoly, MultiIndex, QPoly};
use crate::error::{Error, Result};

/// Degree-`m` part of an exact polynomial, provided `p(rx)/r^m` has a finite nonzero limit.
///
/// Lower-degree terms make the limit diverge (reported with infinite residual); a vanishing
/// degree-`m` part leaves only remainder (reported with residual 1).
pub fn leading_part(p: &QPoly, m: u32) -> Result<QPoly> {
    if p.min_degree().is_some_and(|d| d < m) {
        return Err(Error::NoLeadingPart {
            degree: m,
            residual: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let part = p.homogeneous_part(m);
    if part.is_zero() {
        return Err(Error::NoLeadingPart {
            degree: m,
            residual: 1.0,
            tolerance: 0.0,
        });
    }
    Ok(part)
}

#[derive(Clone, Debug, Serialize)]
pub struct LeadingFitConfig {
    /// Radii are `2^{-j}` for `j_min..=j_max`.
    pub j_min: u32,
    pub j_max: u32,
    /// Relative residual allowed at the smallest radius.
    pub tolerance: f64,
}

impl Default for LeadingFitConfig {
    fn default() -> Self {
        LeadingFitConfig {
            j_min: 4,
            j_max: 12,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LeadingFit {
    #[serde(serialize_with = "ser_display")]
    pub poly: FPoly,
    pub radii: Vec<f64>,
    /// Relative sup residual of the degree-`m` fit on each sphere.
    pub residuals: Vec<f64>,
    /// Residual at the smallest radius.
    pub residual: f64,
    /// Fitted `α` in `|R(x)| ≲ C|x|^{m+α}`, when the residuals are above round-off.
    pub remainder_exponent: Option<f64>,
}

fn ser_display<S: serde::Serializer>(p: &FPoly, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Deterministic well-spread points on `S^{n−1}` (normalized Halton sequence).
pub fn sphere_points(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if n == 2 {
        return (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    assert!(n <= PRIMES.len(), "sphere sampling supports n <= 8");
    let radical_inverse = |mut i: u64, b: u64| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    };
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let x: Vec<f64> = (0..n)
            .map(|d| 2.0 * radical_inverse(i, PRIMES[d]) - 1.0)
            .collect();
        i += 1;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (0.2..=1.0).contains(&r) {
            out.push(x.into_iter().map(|v| v / r).collect());
        }
    }
    out
}

/// Estimates the limit of `f(rx)/r^m` by least squares over degree-`m` monomials on
/// shrinking spheres.
pub fn leading_part_sampled(
    f: impl Fn(&[f64]) -> f64,
    n: usize,
    m: u32,
    cfg: &LeadingFitConfig,
) -> Result<LeadingFit> {
    if cfg.j_min > cfg.j_max {
        return Err(Error::InvalidArgument("empty radius range".into()));
    }
    let monos = MultiIndex::of_degree(n, m);
    let pts = sphere_points(n, 4 * monos.len() + 32);
    let design = DMatrix::from_fn(pts.len(), monos.len(), |i, j| {
        monos[j]
            .0
            .iter()
            .zip(&pts[i])
            .map(|(&e, x)| x.powi(e as i32))
            .product::<f64>()
    });
    let svd = design.clone().svd(true, true);
    let mut radii = Vec::new();
    let mut residuals = Vec::new();
    let mut coeffs = DVector::zeros(monos.len());
    for j in cfg.j_min..=cfg.j_max {
        let r = 0.5f64.powi(j as i32);
        let scale = r.powi(m as i32);
        let g = DVector::from_iterator(
            pts.len(),
            pts.iter().map(|w| {
                let x: Vec<f64> = w.iter().map(|v| v * r).collect();
                f(&x) / scale
            }),
        );
        let c = svd
            .solve(&g, 1e-12)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let res = (&design * &c - &g).amax();
        let size = g.amax();
        let rel = if size > 0.0 { res / size } else { 1.0 };
        radii.push(r);
        residuals.push(rel);
        coeffs = c;
    }
    let residual = *residuals.last().expect("nonempty radius range");
    let remainder_exponent = {
        let pairs: Vec<(f64, f64)> = radii
            .iter()
            .zip(&residuals)
            .filter(|(_, &e)| e > 1e-12)
            .map(|(r, e)| (r.ln(), e.ln()))
            .collect();
        (pairs.len() >= 3).then(|| crate::stats::linear_fit(&pairs).slope)
    };
    if !residual.is_finite() || residual > cfg.tolerance {
        return Err(Error::NoLeadingPart {
            degree: m,
            residual,
            tolerance: cfg.tolerance,
        });
    }
    let mut poly = FPoly::zero(n);
    for (a, c) in monos.into_iter().zip(coeffs.iter()) {
        if c.abs() > 1e-12 {
            poly.add_term(a, *c);
        }
    }
    Ok(LeadingFit {
        poly,
        radii,
        residuals,
        residual,
        remainder_exponent,
    })
}
