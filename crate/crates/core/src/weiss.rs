//! The scale-normalised Weiss energy `W(r,u)`, its correction `F(r,u)` and the
//! monotonicity scan of `W + F`.

use std::f64::consts::TAU;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{dot, Field};
use crate::halfspace::HalfspaceSolution;
use crate::poly::{rat, sphere_l2, FPoly, PiRational, QPoly};
use crate::quadrature::{ball_rule, gl_interval, order_for_level, sphere_rule, PointRule};
use crate::stats::linear_fit;

/// Scalar callable used for remainders `R` and potentials `q`.
pub type ScalarFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

#[derive(Clone, Debug, Serialize)]
pub struct WeissConfig {
    pub m: u32,
    pub n: usize,
    /// Strictly decreasing radii in `(0, 1]`.
    pub r_grid: Vec<f64>,
    /// Sphere refinement level; nodes per arc are `6 · 2^level`.
    pub level: u32,
    /// Gauss nodes in the scale variable of `F`.
    pub s_nodes: usize,
    /// Relative slack for monotonicity violations.
    pub tolerance: f64,
}

impl WeissConfig {
    pub fn new(m: u32, n: usize, r_grid: Vec<f64>) -> Self {
        WeissConfig {
            m,
            n,
            r_grid,
            level: 3,
            s_nodes: 64,
            tolerance: 1e-8,
        }
    }

    /// `steps` radii spaced geometrically from `r_max` down to `r_min`.
    pub fn geometric(m: u32, n: usize, r_min: f64, r_max: f64, steps: usize) -> Result<Self> {
        if steps < 2 || !(r_min > 0.0 && r_min < r_max) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < rmin < rmax and at least two steps, got {r_min}, {r_max}, {steps}"
            )));
        }
        let ratio = (r_min / r_max).ln() / (steps - 1) as f64;
        let grid = (0..steps)
            .map(|k| if k + 1 == steps { r_min } else { r_max * (ratio * k as f64).exp() })
            .collect();
        let cfg = Self::new(m, n, grid);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.n) {
            return Err(Error::InvalidArgument(format!("dimension {} unsupported", self.n)));
        }
        if self.level == 0 || self.s_nodes < 2 {
            return Err(Error::InvalidArgument("quadrature too coarse".into()));
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidArgument("radii must lie in (0, 1]".into()));
        }
        if self.r_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
        }
        Ok(())
    }

    fn radial_order(&self) -> usize {
        self.m as usize + self.n + 4
    }

    fn ball(&self, u: &dyn Field, level: u32) -> Result<PointRule> {
        let sphere = sphere_rule(self.n, order_for_level(level), &u.cut_normals())?;
        Ok(ball_rule(&sphere, self.radial_order()))
    }

    fn sphere(&self, u: &dyn Field, level: u32) -> Result<PointRule> {
        sphere_rule(self.n, order_for_level(level), &u.cut_normals())
    }
}

/// A quadrature value with the difference to the next coarser level.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn check_radius(u: &dyn Field, n: usize, r: f64) -> Result<()> {
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.dim(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    if let Some(h) = u.grid_spacing() {
        if r < 4.0 * h {
            return Err(Error::Unresolved { radius: r, spacing: h });
        }
    }
    Ok(())
}

fn w_at_level(u: &dyn Field, h: &FPoly, cfg: &WeissConfig, r: f64, level: u32) -> Result<f64> {
    let m = cfg.m as i32;
    let ball = cfg.ball(u, level)?;
    let sphere = cfg.sphere(u, level)?;
    let bulk = ball.integrate(|x| {
        let y: Vec<f64> = x.iter().map(|v| v * r).collect();
        let g = u.gradient(&y);
        dot(&g, &g) + 2.0 * h.eval_f64(&y) * u.value(&y)
    });
    let surface = sphere.integrate(|x| {
        let y: Vec<f64> = x.iter().map(|v| v * r).collect();
        u.value(&y).powi(2)
    });
    let w = r.powi(-(2 * m + 2)) * bulk - (m + 2) as f64 * r.powi(-(2 * m + 4)) * surface;
    if !w.is_finite() {
        return Err(Error::Divergent(format!("energy at r = {r} is not finite")));
    }
    Ok(w)
}

/// `W(r,u) = r^{-(2m+n+2)} ∫_{B_r}(|∇u|² + 2Hu) − (m+2) r^{-(2m+n+3)} ∫_{∂B_r} u²`.
pub fn weiss_w(u: &dyn Field, h: &QPoly, cfg: &WeissConfig, r: f64) -> Result<Estimate> {
    check_radius(u, cfg.n, r)?;
    let hf = h.to_f64();
    let fine = w_at_level(u, &hf, cfg, r, cfg.level)?;
    let coarse = w_at_level(u, &hf, cfg, r, cfg.level - 1)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

fn f_at_level(
    u: &dyn Field,
    remainder: Option<ScalarFn>,
    potential: Option<ScalarFn>,
    cfg: &WeissConfig,
    r: f64,
    level: u32,
) -> Result<f64> {
    if remainder.is_none() && potential.is_none() {
        return Ok(0.0);
    }
    let m = cfg.m as i32;
    let ball = cfg.ball(u, level)?;
    let mut total = 0.0;
    for (s, ws) in gl_interval(cfg.s_nodes, 0.0, r) {
        let inner = ball.integrate(|x| {
            let y: Vec<f64> = x.iter().map(|v| v * s).collect();
            let val = u.value(&y);
            let grad = u.gradient(&y);
            let ds_us = -((m + 2) as f64) * s.powi(-m - 3) * val + s.powi(-m - 2) * dot(x, &grad);
            let us = val * s.powi(-m - 2);
            let mut g = 0.0;
            if let Some(rf) = remainder {
                g += s.powi(-m) * rf(&y);
            }
            if let Some(qf) = potential {
                g -= s * s * qf(&y) * us;
            }
            g * ds_us
        });
        if !inner.is_finite() {
            return Err(Error::Divergent(format!("correction integrand diverges at s = {s}")));
        }
        total += ws * inner;
    }
    Ok(2.0 * total)
}

/// `F(r,u) = 2∫₀^r ∫_{B₁} [s^{-m} R(sx) − s² q(sx) u_s] ∂_s u_s dx ds` with `u_s(x) = u(sx)/s^{m+2}`.
pub fn weiss_f(
    u: &dyn Field,
    remainder: Option<ScalarFn>,
    potential: Option<ScalarFn>,
    cfg: &WeissConfig,
    r: f64,
) -> Result<Estimate> {
    check_radius(u, cfg.n, r)?;
    let fine = f_at_level(u, remainder, potential, cfg, r, cfg.level)?;
    let coarse = f_at_level(u, remainder, potential, cfg, r, cfg.level - 1)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedForm {
    pub exact: PiRational,
    pub value: f64,
}

/// Energy of the half-space solution for harmonic `H` of degree `m`:
/// `∫_{S^{n-1}} H² / (2(2m+n+2)(λ_{m+2} − λ_m))` with `λ_k = k(k+n−2)`.
pub fn weiss_closed_form(h: &QPoly, n: usize) -> Result<ClosedForm> {
    if h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.dim(),
        });
    }
    if !h.is_harmonic() {
        return Err(Error::NotHarmonic);
    }
    let m = h.degree().unwrap_or(0);
    if !h.is_zero() && !h.is_homogeneous(m) {
        return Err(Error::NotHomogeneous(m));
    }
    let lam = |k: i64| k * (k + n as i64 - 2);
    let gap = lam(m as i64 + 2) - lam(m as i64);
    let denom = 2 * (2 * m as i64 + n as i64 + 2) * gap;
    let exact = sphere_l2(h)?.scale(&rat(1, denom));
    Ok(ClosedForm {
        value: exact.to_f64(),
        exact,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeissRecord {
    pub r: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "WF")]
    pub wf: f64,
    pub w_error: f64,
    pub f_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeissReport {
    /// Ascending in `r`.
    pub records: Vec<WeissRecord>,
    pub verdict: bool,
    pub max_violation: f64,
    /// `W + F` at the smallest radius.
    pub limit: f64,
    /// Largest spread of `W` over the grid.
    pub w_spread: f64,
    /// Log-log slope of `|F|` against `r`, when `F` is not identically zero.
    pub f_slope: Option<f64>,
}

/// `W`, `F` and `W + F` over the radius grid, with the monotonicity verdict.
pub fn monotonicity_scan(
    u: &dyn Field,
    h: &QPoly,
    remainder: Option<ScalarFn>,
    potential: Option<ScalarFn>,
    cfg: &WeissConfig,
) -> Result<WeissReport> {
    cfg.validate()?;
    let mut records = cfg
        .r_grid
        .iter()
        .map(|&r| {
            let w = weiss_w(u, h, cfg, r)?;
            let f = weiss_f(u, remainder, potential, cfg, r)?;
            Ok(WeissRecord {
                r,
                w: w.value,
                f: f.value,
                wf: w.value + f.value,
                w_error: w.error,
                f_error: f.error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.r.total_cmp(&b.r));
    let mut max_violation = 0.0f64;
    for pair in records.windows(2) {
        let drop = pair[0].wf - pair[1].wf;
        let slack = cfg.tolerance * (1.0 + pair[1].w.abs());
        if drop > 0.0 {
            max_violation = max_violation.max(drop - slack.min(drop));
        }
    }
    let w_min = records.iter().map(|r| r.w).fold(f64::INFINITY, f64::min);
    let w_max = records.iter().map(|r| r.w).fold(f64::NEG_INFINITY, f64::max);
    let f_pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.f.abs() > 1e-300)
        .map(|r| (r.r.ln(), r.f.abs().ln()))
        .collect();
    Ok(WeissReport {
        verdict: max_violation == 0.0,
        max_violation,
        limit: records.first().map_or(0.0, |r| r.wf),
        w_spread: w_max - w_min,
        f_slope: (f_pts.len() >= 2).then(|| linear_fit(&f_pts).slope),
        records,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AngularResiduals {
    /// `max |φ″ + (m+2)² φ − H|` on the circle.
    pub ode: f64,
    /// Distance of `φ − H/(λ_{m+2} − λ_m)` from the degree-`(m+2)` circular harmonics.
    pub harmonic_fit: f64,
}

/// Residuals of the angular equation for a planar profile `θ ↦ (φ, φ″)` of degree `m + 2`.
pub fn angular_residuals(
    m: u32,
    profile: impl Fn(f64) -> (f64, f64),
    h: impl Fn(f64) -> f64,
    samples: usize,
) -> AngularResiduals {
    let k = (m + 2) as f64;
    let gap = 4.0 * (m as f64 + 1.0);
    let thetas: Vec<f64> = (0..samples).map(|i| TAU * i as f64 / samples as f64).collect();
    let mut ode = 0.0f64;
    let psi: Vec<f64> = thetas
        .iter()
        .map(|&t| {
            let (phi, phi2) = profile(t);
            let hv = h(t);
            ode = ode.max((phi2 + k * k * phi - hv).abs());
            phi - hv / gap
        })
        .collect();
    let norm = 2.0 / samples as f64;
    let a: f64 = psi.iter().zip(&thetas).map(|(p, t)| p * (k * t).cos()).sum::<f64>() * norm;
    let b: f64 = psi.iter().zip(&thetas).map(|(p, t)| p * (k * t).sin()).sum::<f64>() * norm;
    let harmonic_fit = psi
        .iter()
        .zip(&thetas)
        .map(|(p, t)| (p - a * (k * t).cos() - b * (k * t).sin()).abs())
        .fold(0.0, f64::max);
    AngularResiduals { ode, harmonic_fit }
}

/// Angular residuals of a planar half-space solution continued to the full circle.
pub fn angular_profile_check(v: &HalfspaceSolution<BigRational>) -> Result<AngularResiduals> {
    if v.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: v.dim,
        });
    }
    if !v.solution.is_homogeneous(v.m + 2) {
        return Err(Error::NotHomogeneous(v.m + 2));
    }
    let p = v.solution.to_f64();
    let (p1, p2) = (p.derivative(0), p.derivative(1));
    let (p11, p12, p22) = (p1.derivative(0), p1.derivative(1), p2.derivative(1));
    let h = v.rhs.to_f64();
    Ok(angular_residuals(
        v.m,
        |t| {
            let (c, s) = (t.cos(), t.sin());
            let x = [c, s];
            let phi2 = s * s * p11.eval_f64(&x) - 2.0 * s * c * p12.eval_f64(&x)
                + c * c * p22.eval_f64(&x)
                - c * p1.eval_f64(&x)
                - s * p2.eval_f64(&x);
            (p.eval_f64(&x), phi2)
        },
        |t| h.eval_f64(&[t.cos(), t.sin()]),
        720,
    ))
}
