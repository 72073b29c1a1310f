use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{ball_lattice, directions};
use crate::error::{Error, Result};
use crate::field::{Field, FieldRef, Rescaled};
use crate::stats::{linear_fit, quadratic_fit};

/// `x ↦ u(rx)/r^k`.
pub fn rescale(u: FieldRef, r: f64, k: f64) -> Result<Rescaled> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidArgument(format!("rescaling radius {r} outside (0, 1]")));
    }
    let n = u.dim();
    Rescaled::new(u, vec![0.0; n], r, k)
}

/// `2^{-j}` for `j = first..=last`, dropping radii the field cannot resolve.
pub fn dyadic_radii(u: &dyn Field, first: u32, last: u32) -> Vec<f64> {
    let floor = u.grid_spacing().map_or(0.0, |h| 4.0 * h);
    (first..=last)
        .map(|j| 0.5f64.powi(j as i32))
        .filter(|&r| r >= floor)
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupSequence {
    pub k: f64,
    pub radii: Vec<f64>,
    /// Sup distance of values between consecutive rescalings on the closed unit ball.
    pub c0: Vec<f64>,
    /// Same for gradients.
    pub c1: Vec<f64>,
    pub converged: bool,
}

/// Rescalings at `r_j = 2^{-j}`, `j = 1..=j_max`, with successive distances on `B̄₁`.
/// Converged when the last `C¹` distance drops below `1e-4`.
pub fn blowup_sequence(u: FieldRef, k: f64, j_max: u32) -> Result<BlowupSequence> {
    let n = u.dim();
    let radii = dyadic_radii(u.as_ref(), 1, j_max);
    if radii.len() < 2 {
        return Err(Error::Unresolved {
            radius: 0.5f64.powi(j_max as i32),
            spacing: u.grid_spacing().unwrap_or(0.0),
        });
    }
    let pts = ball_lattice(n, if n == 2 { 41 } else { 15 });
    let fields: Vec<Rescaled> = radii
        .iter()
        .map(|&r| rescale(Arc::clone(&u), r, k))
        .collect::<Result<_>>()?;
    let (mut c0, mut c1) = (Vec::new(), Vec::new());
    for pair in fields.windows(2) {
        let (d0, d1) = pts
            .par_iter()
            .map(|x| {
                let dv = (pair[0].value(x) - pair[1].value(x)).abs();
                let g0 = pair[0].gradient(x);
                let g1 = pair[1].gradient(x);
                let dg = g0.iter().zip(&g1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                (dv, dg)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        c0.push(d0);
        c1.push(d1);
    }
    let converged = c1.last().is_some_and(|&d| d < 1e-4);
    Ok(BlowupSequence {
        k,
        radii,
        c0,
        c1,
        converged,
    })
}

pub(crate) fn sphere_sup(
    n: usize,
    r: f64,
    dirs: &[Vec<f64>],
    f: impl Fn(&[f64]) -> f64 + Sync,
) -> f64 {
    dirs.par_iter()
        .map(|d| {
            let x: Vec<f64> = d.iter().map(|v| v * r).collect();
            debug_assert_eq!(x.len(), n);
            f(&x).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeFit {
    /// Least-squares slope of `log sup_{∂B_r}|u|` against `log r`.
    pub degree: f64,
    pub near_integer: Option<i64>,
    /// Second-order coefficient of a quadratic fit in `log r`.
    pub curvature: f64,
    pub max_residual: f64,
    /// Set when the linear fit leaves a visible residual, as for logarithmic factors.
    pub log_correction: bool,
    pub samples: Vec<(f64, f64)>,
}

pub fn homogeneity_degree(u: &dyn Field, r_grid: &[f64]) -> Result<DegreeFit> {
    if r_grid.len() < 2 {
        return Err(Error::InvalidArgument("need at least two radii".into()));
    }
    let n = u.dim();
    let dirs = directions(n, if n == 2 { 720 } else { 2000 });
    let mut pts = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if let Some(h) = u.grid_spacing() {
            if r < 4.0 * h {
                return Err(Error::Unresolved { radius: r, spacing: h });
            }
        }
        let s = sphere_sup(n, r, &dirs, |x| u.value(x));
        if !(s > 0.0) {
            return Err(Error::ZeroField);
        }
        pts.push((r.ln(), s.ln()));
    }
    let fit = linear_fit(&pts);
    let curvature = if pts.len() >= 3 { quadratic_fit(&pts)[2] } else { 0.0 };
    let nearest = fit.slope.round();
    Ok(DegreeFit {
        degree: fit.slope,
        near_integer: ((fit.slope - nearest).abs() < 0.02).then_some(nearest as i64),
        curvature,
        max_residual: fit.max_residual,
        log_correction: fit.max_residual > 1e-3,
        samples: pts.iter().map(|&(lr, ls)| (lr.exp(), ls.exp())).collect(),
    })
}
