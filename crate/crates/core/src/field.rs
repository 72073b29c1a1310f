//! Scalar fields on ℝⁿ with gradients and Hessians, analytic where possible.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::{FPoly, QPoly};

/// A scalar field with first and second derivatives.
///
/// Finite-difference defaults scale the step with `|x|`, which keeps relative accuracy for
/// the homogeneous fields studied here.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let h = fd_step(x, 1e-5);
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                y[i] = x[i] + h;
                let fp = self.value(&y);
                y[i] = x[i] - h;
                let fm = self.value(&y);
                y[i] = x[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    /// Row-major `n × n`.
    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let h = fd_step(x, 1e-4);
        let mut y = x.to_vec();
        let mut out = vec![0.0; n * n];
        let f0 = self.value(x);
        for i in 0..n {
            y[i] = x[i] + h;
            let fp = self.value(&y);
            y[i] = x[i] - h;
            let fm = self.value(&y);
            y[i] = x[i];
            out[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let mut s = 0.0;
                for (si, sj) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    s += si * sj * self.value(&y);
                }
                y[i] = x[i];
                y[j] = x[j];
                let v = s / (4.0 * h * h);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let hess = self.hessian(x);
        (0..n).map(|i| hess[i * n + i]).sum()
    }

    /// True when derivatives are exact formulas rather than differences or interpolation.
    fn is_analytic(&self) -> bool {
        false
    }

    /// Normals `ν` of hyperplanes `{x·ν = 0}` across which the field is only piecewise smooth.
    fn cut_normals(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }

    /// Sampling resolution for grid-backed fields.
    fn grid_spacing(&self) -> Option<f64> {
        None
    }

    fn describe(&self) -> String {
        "field".into()
    }
}

pub type FieldRef = Arc<dyn Field>;

fn fd_step(x: &[f64], rel: f64) -> f64 {
    let s = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    rel * s.max(1e-3)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Frobenius norm of a row-major square matrix.
pub fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Polynomial restricted to the cone `∩ {x·ν ≥ 0}` and extended by zero.
#[derive(Clone)]
pub struct ConePoly {
    poly: QPoly,
    f: FPoly,
    grad: Vec<FPoly>,
    hess: Vec<FPoly>,
    normals: Vec<Vec<f64>>,
}

impl ConePoly {
    pub fn new(poly: QPoly, normals: Vec<Vec<f64>>) -> Result<Self> {
        let n = poly.dim();
        if let Some(bad) = normals.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let grad_q = poly.gradient();
        let hess = (0..n * n)
            .map(|k| grad_q[k / n].derivative(k % n).to_f64())
            .collect();
        Ok(ConePoly {
            f: poly.to_f64(),
            grad: grad_q.iter().map(QPoly::to_f64).collect(),
            hess,
            poly,
            normals,
        })
    }

    /// The polynomial on all of ℝⁿ.
    pub fn whole(poly: QPoly) -> Self {
        Self::new(poly, Vec::new()).expect("no normals to mismatch")
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn inside(&self, x: &[f64]) -> bool {
        self.normals.iter().all(|nu| dot(nu, x) >= 0.0)
    }
}

impl Field for ConePoly {
    fn dim(&self) -> usize {
        self.poly.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.inside(x) {
            self.f.eval_f64(x)
        } else {
            0.0
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if self.inside(x) {
            self.grad.iter().map(|g| g.eval_f64(x)).collect()
        } else {
            vec![0.0; x.len()]
        }
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        if self.inside(x) {
            self.hess.iter().map(|g| g.eval_f64(x)).collect()
        } else {
            vec![0.0; x.len() * x.len()]
        }
    }

    fn is_analytic(&self) -> bool {
        true
    }

    fn cut_normals(&self) -> Vec<Vec<f64>> {
        self.normals.clone()
    }

    fn describe(&self) -> String {
        if self.normals.is_empty() {
            format!("{}", self.poly)
        } else {
            format!("({}) on cone {:?}", self.poly, self.normals)
        }
    }
}

impl fmt::Debug for ConePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// `u₀(x)(1 + c|x|)` for a homogeneous cone solution `u₀` of `Δu₀ = H χ`.
///
/// It solves `Δu = (H + R) χ` with `R = c(|x| H + (2m + n + 3) u₀/|x|)`, so `|R| ≤ C|x|^{m+1}`.
#[derive(Clone, Debug)]
pub struct RadiallyModulated {
    pub base: ConePoly,
    pub h: FPoly,
    pub m: u32,
    pub c: f64,
}

impl RadiallyModulated {
    pub fn new(base: ConePoly, h: &QPoly, m: u32, c: f64) -> Self {
        RadiallyModulated {
            base,
            h: h.to_f64(),
            m,
            c,
        }
    }

    /// The remainder `R` on the support (zero outside).
    pub fn remainder(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 || !self.base.inside(x) {
            return 0.0;
        }
        let n = x.len() as f64;
        self.c * (r * self.h.eval_f64(x) + (2.0 * self.m as f64 + n + 3.0) * self.base.value(x) / r)
    }
}

impl Field for RadiallyModulated {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.base.value(x) * (1.0 + self.c * norm(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        let g = 1.0 + self.c * r;
        let u = self.base.value(x);
        let du = self.base.gradient(x);
        du.iter()
            .zip(x)
            .map(|(d, xi)| d * g + if r > 0.0 { u * self.c * xi / r } else { 0.0 })
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let r = norm(x);
        let g = 1.0 + self.c * r;
        let u = self.base.value(x);
        let du = self.base.gradient(x);
        let mut out: Vec<f64> = self.base.hessian(x).iter().map(|v| v * g).collect();
        if r > 0.0 {
            for i in 0..n {
                for j in 0..n {
                    let (xi, xj) = (x[i] / r, x[j] / r);
                    let delta = if i == j { 1.0 } else { 0.0 };
                    out[i * n + j] +=
                        self.c * (du[i] * xj + du[j] * xi) + u * self.c * (delta - xi * xj) / r;
                }
            }
        }
        out
    }

    fn is_analytic(&self) -> bool {
        true
    }

    fn cut_normals(&self) -> Vec<Vec<f64>> {
        self.base.cut_normals()
    }

    fn describe(&self) -> String {
        format!("{} * (1 + {}|x|)", self.base.describe(), self.c)
    }
}

/// `h(x) |log|x||^α` on `B_1`, `h` harmonic and homogeneous.
#[derive(Clone, Debug)]
pub struct LogCounterexample {
    h: FPoly,
    grad: Vec<FPoly>,
    hess: Vec<FPoly>,
    pub alpha: f64,
    /// Homogeneity of `h`.
    pub degree: u32,
}

impl LogCounterexample {
    pub fn new(h: &QPoly, alpha: f64) -> Result<Self> {
        let degree = h.degree().ok_or(Error::ZeroField)?;
        if !h.is_homogeneous(degree) {
            return Err(Error::NotHomogeneous(degree));
        }
        if !h.is_harmonic() {
            return Err(Error::NotHarmonic);
        }
        let n = h.dim();
        let g = h.gradient();
        Ok(LogCounterexample {
            h: h.to_f64(),
            grad: g.iter().map(QPoly::to_f64).collect(),
            hess: (0..n * n).map(|k| g[k / n].derivative(k % n).to_f64()).collect(),
            alpha,
            degree,
        })
    }

    fn log_terms(&self, x: &[f64]) -> (f64, f64, f64, f64) {
        let r = norm(x);
        let l = -r.ln();
        let a = self.alpha;
        (r, l.powf(a), a * l.powf(a - 1.0), a * (a - 1.0) * l.powf(a - 2.0))
    }
}

impl Field for LogCounterexample {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        self.h.eval_f64(x) * (-r.ln()).abs().powf(self.alpha)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (r, phi, dphi, _) = self.log_terms(x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let h = self.h.eval_f64(x);
        // ∇L = −x/|x|²
        self.grad
            .iter()
            .zip(x)
            .map(|(g, xi)| g.eval_f64(x) * phi - h * dphi * xi / (r * r))
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let (r, phi, dphi, ddphi) = self.log_terms(x);
        if r == 0.0 {
            return vec![0.0; n * n];
        }
        let h = self.h.eval_f64(x);
        let dh: Vec<f64> = self.grad.iter().map(|g| g.eval_f64(x)).collect();
        let r2 = r * r;
        let dl: Vec<f64> = x.iter().map(|xi| -xi / r2).collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let ddl = -(delta / r2 - 2.0 * x[i] * x[j] / (r2 * r2));
                out[i * n + j] = self.hess[i * n + j].eval_f64(x) * phi
                    + dphi * (dh[i] * dl[j] + dh[j] * dl[i])
                    + h * (ddphi * dl[i] * dl[j] + dphi * ddl);
            }
        }
        out
    }

    fn is_analytic(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("({}) |log|x||^{}", self.h, self.alpha)
    }
}

/// Closure-backed field with finite-difference derivatives.
pub struct FnField<F: Fn(&[f64]) -> f64 + Send + Sync> {
    n: usize,
    f: F,
    label: String,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnField<F> {
    pub fn new(n: usize, label: impl Into<String>, f: F) -> Self {
        FnField {
            n,
            f,
            label: label.into(),
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Field for FnField<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `x ↦ u(center + r x) / r^k`.
#[derive(Clone)]
pub struct Rescaled {
    pub base: FieldRef,
    pub center: Vec<f64>,
    pub r: f64,
    pub k: f64,
}

impl Rescaled {
    pub fn new(base: FieldRef, center: Vec<f64>, r: f64, k: f64) -> Result<Self> {
        if center.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: center.len(),
            });
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("rescaling radius {r} must be positive")));
        }
        if let Some(h) = base.grid_spacing() {
            // the rescaled unit ball must still hold several base cells
            if r < 4.0 * h {
                return Err(Error::Unresolved { radius: r, spacing: h });
            }
        }
        Ok(Rescaled { base, center, r, k })
    }

    fn map(&self, x: &[f64]) -> Vec<f64> {
        self.center.iter().zip(x).map(|(c, xi)| c + self.r * xi).collect()
    }
}

impl Field for Rescaled {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.base.value(&self.map(x)) / self.r.powf(self.k)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = self.r.powf(1.0 - self.k);
        self.base.gradient(&self.map(x)).into_iter().map(|g| g * s).collect()
    }

    fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let s = self.r.powf(2.0 - self.k);
        self.base.hessian(&self.map(x)).into_iter().map(|g| g * s).collect()
    }

    fn is_analytic(&self) -> bool {
        self.base.is_analytic()
    }

    fn cut_normals(&self) -> Vec<Vec<f64>> {
        if self.center.iter().all(|c| *c == 0.0) {
            self.base.cut_normals()
        } else {
            Vec::new()
        }
    }

    fn grid_spacing(&self) -> Option<f64> {
        self.base.grid_spacing().map(|h| h / self.r)
    }

    fn describe(&self) -> String {
        format!("{} rescaled by r={} k={}", self.base.describe(), self.r, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn q(s: &str, n: usize) -> QPoly {
        parse_poly(s, Some(n)).unwrap()
    }

    fn fd_check(f: &dyn Field, x: &[f64], tol: f64) {
        struct Plain<'a>(&'a dyn Field);
        impl Field for Plain<'_> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.0.value(x)
            }
        }
        let plain = Plain(f);
        let g = f.gradient(x);
        let gd = plain.gradient(x);
        for (a, b) in g.iter().zip(&gd) {
            assert!((a - b).abs() < tol * (1.0 + a.abs()), "gradient {a} vs {b}");
        }
        let h = f.hessian(x);
        let hd = plain.hessian(x);
        for (a, b) in h.iter().zip(&hd) {
            assert!((a - b).abs() < 1e3 * tol * (1.0 + a.abs()), "hessian {a} vs {b}");
        }
    }

    #[test]
    fn cone_poly_vanishes_outside() {
        let f = ConePoly::new(q("x1^2 x2^2", 2), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(f.value(&[-0.5, 0.5]), 0.0);
        assert!((f.value(&[0.5, 0.5]) - 0.0625).abs() < 1e-15);
        fd_check(&f, &[0.3, 0.4], 1e-7);
    }

    #[test]
    fn modulated_derivatives_and_remainder() {
        let base = ConePoly::new(q("1/2 * x1 x2^2", 2), vec![vec![0.0, 1.0]]).unwrap();
        let u = RadiallyModulated::new(base, &q("x1", 2), 1, 0.3);
        let x = [0.31, 0.42];
        fd_check(&u, &x, 1e-7);
        // Δu = H + R on the support
        let lap: f64 = {
            let h = u.hessian(&x);
            h[0] + h[3]
        };
        assert!((lap - (x[0] + u.remainder(&x))).abs() < 1e-12);
    }

    #[test]
    fn log_field_derivatives() {
        let u = LogCounterexample::new(&q("x1^2 - x2^2", 2), 1.0).unwrap();
        fd_check(&u, &[0.11, 0.05], 1e-6);
        // Δu = −2(m+2) h/|x|² with m = 0 in the plane
        let x = [0.01, 0.02];
        let h = u.hessian(&x);
        let r2 = x[0] * x[0] + x[1] * x[1];
        let expect = -4.0 * (x[0] * x[0] - x[1] * x[1]) / r2;
        assert!((h[0] + h[3] - expect).abs() < 1e-10);
        assert!(LogCounterexample::new(&QPoly::radius_squared(2), 1.0).is_err());
    }

    #[test]
    fn rescaled_scales_derivatives() {
        let base: FieldRef = Arc::new(ConePoly::whole(q("x1^3 + x1^4", 1)));
        let r = Rescaled::new(base, vec![0.0], 0.5, 3.0).unwrap();
        // x³ + x⁴/2
        assert!((r.value(&[0.8]) - (0.512 + 0.4096 / 2.0)).abs() < 1e-14);
        fd_check(&r, &[0.8], 1e-7);
    }
}
