//! Non-existence of homogeneous planar sector solutions with harmonic right-hand side,
//! certified by scanning the boundary-condition determinant.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{rat, QPoly};

/// Boundary conditions at `θ = θ₀` on the coefficients `(a, b)` of `H = a z^m + b z̄^m`.
#[derive(Clone, Debug)]
pub struct SectorSystem {
    pub m: u32,
    pub theta0: f64,
    pub a: [[Complex64; 2]; 2],
}

impl SectorSystem {
    pub fn det(&self) -> Complex64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }
}

fn check_angle(theta0: f64) -> Result<()> {
    if !(theta0 > 0.0 && theta0 < TAU) {
        return Err(Error::InvalidArgument(format!("angle {theta0} outside (0, 2π)")));
    }
    Ok(())
}

/// Rows are the vanishing of `u₀` and of its normal derivative on the ray `θ = θ₀`.
pub fn build_sector_matrix(m: u32, theta0: f64) -> Result<SectorSystem> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "m = 0 has no matrix system; use the analytic verdict".into(),
        ));
    }
    check_angle(theta0)?;
    let z = Complex64::from_polar(1.0, theta0);
    let mi = m as i32;
    let mf = m as f64;
    let p = |k: i32| z.powi(k);
    let row0 = [
        p(mi) - p(mi + 2) * ((mf + 1.0) / (mf + 2.0)) - p(-mi - 2) / (mf + 2.0),
        p(-mi) - p(mi + 2) / (mf + 2.0) - p(-mi - 2) * ((mf + 1.0) / (mf + 2.0)),
    ];
    let row1 = [
        p(mi) * mf - p(mi + 2) * (mf + 1.0) + p(-mi - 2),
        -p(-mi) * mf - p(mi + 2) + p(-mi - 2) * (mf + 1.0),
    ];
    Ok(SectorSystem {
        m,
        theta0,
        a: [row0, row1],
    })
}

/// `−4((z^{m+1} − z^{−m−1})² − (m+1)²(z − z^{−1})²)` at `z = e^{iθ₀}`, equal to
/// `16(sin²((m+1)θ₀) − (m+1)² sin²θ₀)` and to `2(m+2) det A`.
pub fn det_reduced(m: u32, theta0: f64) -> f64 {
    let k = m as f64 + 1.0;
    -16.0 * k * k * Branch::Plus.residual(m, theta0) * Branch::Minus.residual(m, theta0)
}

/// `sin(kt)/k − sin t` without cancellation for small `|kt|`.
fn sin_gap(k: f64, t: f64) -> f64 {
    if (k * t).abs() > 1.0 {
        return (k * t).sin() / k - t.sin();
    }
    let (t2, k2) = (t * t, k * k);
    let mut sum = 0.0;
    let mut pow_t = t;
    let mut pow_k = 1.0;
    let mut fact = 1.0;
    for j in 1..30 {
        pow_t *= -t2;
        pow_k *= k2;
        fact *= ((2 * j) * (2 * j + 1)) as f64;
        let term = pow_t * (pow_k - 1.0) / fact;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// The same expression in complex arithmetic, for checking that it is real.
pub fn det_reduced_complex(m: u32, theta0: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta0);
    let k = m as i32 + 1;
    let a = z.powi(k) - z.powi(-k);
    let b = z - z.inv();
    -4.0 * (a * a - (k * k) as f64 * b * b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// `g±(θ) = sin θ ∓ sin((m+1)θ)/(m+1)`.
    ///
    /// Evaluated from the nearest multiple `jπ`, where the roots sit.
    pub fn residual(self, m: u32, theta: f64) -> f64 {
        let k = m as f64 + 1.0;
        let j = (theta / PI).round();
        let t = theta - j * PI;
        let outer = if j as i64 % 2 == 0 { 1.0 } else { -1.0 };
        let inner = if (j as i64 * m as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let sigma = match self {
            Branch::Plus => -inner,
            Branch::Minus => inner,
        };
        if sigma < 0.0 {
            -outer * sin_gap(k, t)
        } else {
            outer * (t.sin() + (k * t).sin() / k)
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectorRoot {
    pub theta: f64,
    pub branch: Branch,
    pub abs_det: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
}

impl ScanGrid {
    /// `[10⁻⁴, 2π − 10⁻⁴]`; closer to the degenerate angles the residuals drown in rounding.
    pub fn full(steps: usize) -> Self {
        ScanGrid {
            theta_min: 1e-4,
            theta_max: TAU - 1e-4,
            steps,
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scan_branch(m: u32, branch: Branch, grid: &ScanGrid, tol: f64) -> Vec<SectorRoot> {
    let h = (grid.theta_max - grid.theta_min) / grid.steps as f64;
    let at = |i: usize| grid.theta_min + h * i as f64;
    let vals: Vec<f64> = (0..=grid.steps)
        .into_par_iter()
        .map(|i| branch.residual(m, at(i)))
        .collect();
    // exact zeros are skipped; a root is a sign change between nonzero samples
    let mut roots = Vec::new();
    let mut last: Option<usize> = None;
    for i in 0..=grid.steps {
        if vals[i] == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if (vals[j] < 0.0) != (vals[i] < 0.0) {
                let theta = bisect(|t| branch.residual(m, t), at(j), at(i), tol);
                roots.push(SectorRoot {
                    theta,
                    branch,
                    abs_det: det_reduced(m, theta).abs(),
                });
            }
        }
        last = Some(i);
    }
    roots
}

#[derive(Clone, Debug, Serialize)]
pub struct RootScan {
    pub m: u32,
    pub roots: Vec<SectorRoot>,
    /// Grid intervals of the scan whose root set matched the next coarser one.
    pub steps: usize,
    pub stable: bool,
}

fn same_roots(a: &[SectorRoot], b: &[SectorRoot], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| x.branch == y.branch && (x.theta - y.theta).abs() <= tol)
}

/// Sign-change roots of both branches, bisected to `refine_tol`; the grid is doubled
/// until two consecutive root sets agree.
pub fn scan_sector_roots(m: u32, grid: ScanGrid, refine_tol: f64) -> Result<RootScan> {
    if !(grid.theta_min > 0.0 && grid.theta_max < TAU && grid.theta_min < grid.theta_max) {
        return Err(Error::InvalidArgument("scan grid must lie inside (0, 2π)".into()));
    }
    if grid.steps == 0 || !(refine_tol > 0.0) {
        return Err(Error::InvalidArgument("scan needs steps > 0 and refine_tol > 0".into()));
    }
    let run = |steps: usize| {
        let g = ScanGrid { steps, ..grid };
        let mut r = scan_branch(m, Branch::Plus, &g, refine_tol);
        r.extend(scan_branch(m, Branch::Minus, &g, refine_tol));
        r.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        r
    };
    let mut steps = grid.steps;
    let mut prev = run(steps);
    for _ in 0..4 {
        let next = run(2 * steps);
        steps *= 2;
        let stable = same_roots(&prev, &next, 10.0 * refine_tol);
        prev = next;
        if stable {
            return Ok(RootScan {
                m,
                roots: prev,
                steps,
                stable: true,
            });
        }
    }
    Ok(RootScan {
        m,
        roots: prev,
        steps,
        stable: false,
    })
}

/// Roots of the `m = 1` residuals in closed form: `sin θ (1 ∓ cos θ) = 0` on `(0, 2π)`.
pub fn closed_form_roots_m1() -> Vec<f64> {
    vec![PI]
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `(argmin, min)` of `|det_reduced|` on `[lo, hi]`: grid scan then golden-section refinement.
pub fn min_abs_det_on(m: u32, lo: f64, hi: f64, steps: usize) -> (f64, f64) {
    let h = (hi - lo) / steps as f64;
    let (i, _) = (0..=steps)
        .into_par_iter()
        .map(|i| (i, det_reduced(m, lo + h * i as f64).abs()))
        .reduce(
            || (0, f64::INFINITY),
            |a, b| if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    let a = (lo + h * (i as f64 - 1.0)).max(lo);
    let b = (lo + h * (i as f64 + 1.0)).min(hi);
    let (t, v) = golden_min(|t| det_reduced(m, t).abs(), a, b);
    let (te, ve) = [(lo, det_reduced(m, lo).abs()), (hi, det_reduced(m, hi).abs())]
        .into_iter()
        .fold((t, v), |best, c| if c.1 < best.1 { c } else { best });
    (te, ve)
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorCertificate {
    pub m: u32,
    pub delta: f64,
    pub min_abs_det: f64,
    pub argmin_theta: f64,
    /// Minimum recomputed on a grid twice as fine.
    pub min_abs_det_refined: f64,
    pub refinement_stable: bool,
    pub roots_found: Vec<f64>,
    /// A root away from `π`, or a vanishing minimum off `π`.
    pub contradiction: bool,
}

/// Minimum of `|det_reduced|` over `θ₀ ∈ [δ, π−δ] ∪ [π+δ, 2π−δ]` for every `m ≤ m_max`,
/// with the root scan attached.
pub fn sector_nonexistence_certificate(
    m_max: u32,
    delta: f64,
    scan_steps: usize,
) -> Result<Vec<SectorCertificate>> {
    if m_max < 1 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 0.5 * PI) {
        return Err(Error::InvalidArgument(format!("margin {delta} outside (0, π/2)")));
    }
    (1..=m_max)
        .map(|m| {
            let pieces = [(delta, PI - delta), (PI + delta, TAU - delta)];
            let best = |steps: usize| {
                pieces
                    .iter()
                    .map(|&(lo, hi)| min_abs_det_on(m, lo, hi, steps))
                    .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
            };
            let (argmin, min) = best(scan_steps);
            let (_, refined) = best(2 * scan_steps);
            let scan = scan_sector_roots(m, ScanGrid::full(scan_steps), 1e-12)?;
            // both residual branches vanish at π; report distinct angles
            let mut roots: Vec<f64> = scan.roots.iter().map(|r| r.theta).collect();
            roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let off_pi = roots.iter().any(|t| (t - PI).abs() > 1e-9);
            Ok(SectorCertificate {
                m,
                delta,
                min_abs_det: min,
                argmin_theta: argmin,
                min_abs_det_refined: refined,
                refinement_stable: (min - refined).abs() <= 1e-9 * min.max(1e-300),
                roots_found: roots,
                contradiction: off_pi || !(min > 0.0),
            })
        })
        .collect()
}

/// For `m = 0` the half-space solution is `(a/2) x₂²`; it vanishes to first order on the ray
/// `θ = θ₀` only when `sin θ₀ = 0`, so a nontrivial solution exists only at `θ₀ = π`.
pub fn m0_admits_solution(theta0: f64) -> Result<bool> {
    check_angle(theta0)?;
    let s = theta0.sin();
    // u₀ = s²/2 and ∂_ν u₀ = s cos θ₀ at the unit point of the ray
    Ok(s * s / 2.0 <= 1e-15 && (s * theta0.cos()).abs() <= 1e-15)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadrantControl {
    pub laplacian: String,
    pub rhs_harmonic: bool,
    /// `u` and `∇u` vanish identically on both boundary rays.
    pub vanishes_on_boundary: bool,
}

/// `u = x₁² x₂²` in the quadrant: boundary data vanish to second order, yet `Δu = 2|x|²` is not
/// harmonic, so the sector result does not apply.
pub fn quadrant_control() -> QuadrantControl {
    let u = &QPoly::monomial(crate::poly::MultiIndex(vec![2, 2]), rat(1, 1)) * &QPoly::one(2);
    let zero = rat(0, 1);
    let on_axis = |i: usize| {
        u.restrict(i, &zero).is_zero()
            && u.gradient().iter().all(|g| g.restrict(i, &zero).is_zero())
    };
    let lap = u.laplacian();
    QuadrantControl {
        laplacian: lap.to_string(),
        rhs_harmonic: lap.is_harmonic(),
        vanishes_on_boundary: on_axis(0) && on_axis(1),
    }
}
