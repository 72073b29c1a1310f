use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use super::directions;
use super::sequence::sphere_sup;
use crate::domain::DomainShape;
use crate::error::{Error, Result};
use crate::field::{frobenius, norm, Field};
use crate::poly::random::seeded;
use crate::stats::linear_fit;

/// Growth of `sup_{∂B_r} g / r^p` over the radius grid.
#[derive(Clone, Debug, Serialize)]
pub struct BoundFit {
    pub name: String,
    pub exponent: f64,
    /// Largest observed ratio.
    pub constant: f64,
    /// Slope of the ratio against `log(1/r)`.
    pub log_growth: f64,
    /// `log_growth · (span of log(1/r)) / constant`; near zero for bounded ratios.
    pub relative_growth: f64,
    pub ratios: Vec<f64>,
    pub pass: bool,
}

const GROWTH_LIMIT: f64 = 0.25;

fn bound_fit(name: &str, exponent: f64, radii: &[f64], sups: &[f64]) -> BoundFit {
    let ratios: Vec<f64> = radii.iter().zip(sups).map(|(r, s)| s / r.powf(exponent)).collect();
    let pts: Vec<(f64, f64)> = radii.iter().zip(&ratios).map(|(r, q)| (-r.ln(), *q)).collect();
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    let log_growth = if pts.len() >= 2 { linear_fit(&pts).slope } else { 0.0 };
    let span = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let relative_growth = if constant > 0.0 { log_growth * span / constant } else { 0.0 };
    BoundFit {
        name: name.into(),
        exponent,
        constant,
        log_growth,
        relative_growth,
        pass: ratios.iter().all(|q| q.is_finite()) && relative_growth < GROWTH_LIMIT,
        ratios,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub m: u32,
    pub radii: Vec<f64>,
    /// `|u| ≲ r^{m+2}`, `|∇u| ≲ r^{m+1}`, `|∇²u| ≲ r^m`.
    pub value: BoundFit,
    pub gradient: BoundFit,
    pub hessian: BoundFit,
    /// `|Δu| ≲ r^m`, reported separately.
    pub laplacian: BoundFit,
    pub pass: bool,
}

/// Sphere suprema of `u`, `∇u`, `∇²u` and `Δu` over the radius grid, fitted against the
/// powers `m+2`, `m+1`, `m`, `m`.
pub fn decay_rate_check(u: &dyn Field, m: u32, r_grid: &[f64]) -> Result<DecayReport> {
    if r_grid.len() < 2 {
        return Err(Error::InvalidArgument("need at least two radii".into()));
    }
    let n = u.dim();
    let dirs = directions(n, if n == 2 { 720 } else { 2000 });
    let mut sups = [vec![], vec![], vec![], vec![]];
    for &r in r_grid {
        if let Some(h) = u.grid_spacing() {
            if r < 4.0 * h {
                return Err(Error::Unresolved { radius: r, spacing: h });
            }
        }
        sups[0].push(sphere_sup(n, r, &dirs, |x| u.value(x)));
        sups[1].push(sphere_sup(n, r, &dirs, |x| norm(&u.gradient(x))));
        sups[2].push(sphere_sup(n, r, &dirs, |x| frobenius(&u.hessian(x))));
        sups[3].push(sphere_sup(n, r, &dirs, |x| u.laplacian(x)));
    }
    let mf = m as f64;
    let value = bound_fit("value", mf + 2.0, r_grid, &sups[0]);
    let gradient = bound_fit("gradient", mf + 1.0, r_grid, &sups[1]);
    let hessian = bound_fit("hessian", mf, r_grid, &sups[2]);
    let laplacian = bound_fit("laplacian", mf, r_grid, &sups[3]);
    Ok(DecayReport {
        m,
        radii: r_grid.to_vec(),
        pass: value.pass && gradient.pass && hessian.pass,
        value,
        gradient,
        hessian,
        laplacian,
    })
}

/// Sample points with `d(x, ∂D)/|x| ∈ [2^{-level-1}, 2^{-level})`.
#[derive(Clone, Debug, Serialize)]
pub struct Stratum {
    pub level: u32,
    pub count: usize,
    pub max_value_ratio: f64,
    pub max_gradient_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FineDecayReport {
    pub m: u32,
    pub strata: Vec<Stratum>,
    /// `sup |u| / (|x|^m d²)`.
    pub value_constant: f64,
    /// `sup |∇u| / (|x|^m d)`.
    pub gradient_constant: f64,
    /// Log₂ growth of the stratum maxima per level; bounded ratios give about zero.
    pub value_slope: f64,
    pub gradient_slope: f64,
    pub value_pass: bool,
    pub gradient_pass: bool,
    pub pass: bool,
}

const MAX_LEVEL: u32 = 24;

fn inward_normal(domain: &DomainShape, b: &[f64]) -> Vec<f64> {
    let h = 1e-7 * (1.0 + norm(b));
    let mut y = b.to_vec();
    let g: Vec<f64> = (0..b.len())
        .map(|i| {
            y[i] = b[i] + h;
            let p = domain.signed_distance(&y);
            y[i] = b[i] - h;
            let q = domain.signed_distance(&y);
            y[i] = b[i];
            -(p - q) / (2.0 * h)
        })
        .collect();
    let l = norm(&g);
    g.iter().map(|v| v / l).collect()
}

/// Ratios `|u|/(|x|^m d²)` and `|∇u|/(|x|^m d)` with `d = d(x, ∂D)`, stratified by `d/|x|`.
/// A bound passes when stratum maxima do not grow with the level (log₂ slope below `1/2`).
pub fn fine_decay_check(u: &dyn Field, domain: &DomainShape, m: u32) -> Result<FineDecayReport> {
    let n = u.dim();
    if domain.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: domain.dim(),
        });
    }
    let mut rng = seeded(0x5eed);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < 4000 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = norm(&x);
        if r <= 1.0 && r >= 1.0 / 64.0 && domain.contains(&x) {
            pts.push(x);
        }
    }
    match domain.boundary_points(1.0, 32) {
        Ok(bs) => {
            for b in bs.iter().filter(|b| norm(b) > 1.0 / 64.0) {
                let nu = inward_normal(domain, b);
                let rb = norm(b);
                for k in 1..=MAX_LEVEL {
                    let t = rb * 0.5f64.powi(k as i32);
                    let x: Vec<f64> = b.iter().zip(&nu).map(|(bi, vi)| bi + t * vi).collect();
                    if domain.contains(&x) && norm(&x) <= 1.0 {
                        pts.push(x);
                    }
                }
            }
        }
        Err(Error::DegenerateDomain) => {}
        Err(e) => return Err(e),
    }
    let samples: Vec<(u32, f64, f64)> = pts
        .par_iter()
        .filter_map(|x| {
            let d = domain.boundary_distance(x);
            if !d.is_finite() || d <= 0.0 {
                return None;
            }
            let r = norm(x);
            let level = (-(d / r).log2()).floor().clamp(0.0, MAX_LEVEL as f64) as u32;
            let scale = r.powi(m as i32);
            Some((
                level,
                u.value(x).abs() / (scale * d * d),
                norm(&u.gradient(x)) / (scale * d),
            ))
        })
        .collect();
    let mut strata: Vec<Stratum> = (0..=MAX_LEVEL)
        .map(|level| Stratum {
            level,
            count: 0,
            max_value_ratio: 0.0,
            max_gradient_ratio: 0.0,
        })
        .collect();
    for (level, v, g) in samples {
        let s = &mut strata[level as usize];
        s.count += 1;
        s.max_value_ratio = s.max_value_ratio.max(v);
        s.max_gradient_ratio = s.max_gradient_ratio.max(g);
    }
    strata.retain(|s| s.count > 0);
    let slope = |get: fn(&Stratum) -> f64| {
        let pts: Vec<(f64, f64)> = strata
            .iter()
            .filter(|s| get(s) > 0.0)
            .map(|s| (s.level as f64, get(s).log2()))
            .collect();
        if pts.len() >= 2 {
            linear_fit(&pts).slope
        } else {
            0.0
        }
    };
    let value_slope = slope(|s| s.max_value_ratio);
    let gradient_slope = slope(|s| s.max_gradient_ratio);
    let value_constant = strata.iter().map(|s| s.max_value_ratio).fold(0.0, f64::max);
    let gradient_constant = strata.iter().map(|s| s.max_gradient_ratio).fold(0.0, f64::max);
    let value_pass = value_constant.is_finite() && value_slope < 0.5;
    let gradient_pass = gradient_constant.is_finite() && gradient_slope < 0.5;
    Ok(FineDecayReport {
        m,
        strata,
        value_constant,
        gradient_constant,
        value_slope,
        gradient_slope,
        value_pass,
        gradient_pass,
        pass: value_pass && gradient_pass,
    })
}
