use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use puruspe::{Jn, Yn};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::quadrature::{gauss_legendre, gl_interval};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Outgoing fundamental solution `Φ(r) = (i/4) H₀⁽¹⁾(kr)` of `-(Δ + k²)`.
pub fn phi(k: f64, r: f64) -> Complex64 {
    let x = k * r;
    Complex64::new(-0.25 * Yn(0, x), 0.25 * Jn(0, x))
}

/// `Φ(r) + ln(r)/(2π)`, continuous at `r = 0`.
pub fn phi_regular(k: f64, r: f64) -> Complex64 {
    if r == 0.0 {
        return Complex64::new(-((0.5 * k).ln() + EULER_GAMMA) / (2.0 * PI), 0.25);
    }
    phi(k, r) + r.ln() / (2.0 * PI)
}

/// `∫_{[-a,a]²} ln|y| dy`.
pub fn log_square_integral(a: f64) -> f64 {
    2.0 * a * a * (2.0 * a.ln() + 2f64.ln() + 0.5 * PI - 3.0)
}

const NEAR_NODES: usize = 12;
const FAR_NODES: usize = 3;
/// Cells within this Chebyshev index distance use the fine rule.
const NEAR_RANGE: i64 = 2;

fn tensor_integral(nodes: usize, cx: f64, cy: f64, a: f64, f: impl Fn(f64, f64) -> Complex64) -> Complex64 {
    let gl = gauss_legendre(nodes);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(s, ws) in gl.iter() {
        for &(t, wt) in gl.iter() {
            acc += f(cx + a * s, cy + a * t) * (ws * wt);
        }
    }
    acc * (a * a)
}

/// `∫_cell Φ(|y|) dy` for the cell of side `spacing` centred at `(di, dj)·spacing`.
pub fn cell_integral(k: f64, spacing: f64, di: i64, dj: i64) -> Complex64 {
    let a = 0.5 * spacing;
    let (cx, cy) = (di as f64 * spacing, dj as f64 * spacing);
    if di == 0 && dj == 0 {
        // polar about the centre over 8 congruent triangles; `r·R(r)` is smooth in r
        let mut regular = Complex64::new(0.0, 0.0);
        for (t, wt) in gl_interval(NEAR_NODES, 0.0, 0.25 * PI) {
            let rmax = a / t.cos();
            for (r, wr) in gl_interval(NEAR_NODES, 0.0, rmax) {
                regular += phi_regular(k, r) * (wt * wr * r);
            }
        }
        return regular * 8.0 - log_square_integral(a) / (2.0 * PI);
    }
    let nodes = if di.abs().max(dj.abs()) <= NEAR_RANGE { NEAR_NODES } else { FAR_NODES };
    tensor_integral(nodes, cx, cy, a, |x, y| phi(k, x.hypot(y)))
}

/// Cell integrals of `Φ` on an `n × n` grid, embedded in a `2n × 2n` circulant so that
/// grid convolution becomes an FFT product.
pub struct KernelTable {
    pub n: usize,
    pub spacing: f64,
    /// Spatial table, row-major over `(dj mod 2n, di mod 2n)`.
    pub spatial: Vec<Complex64>,
    hat: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl KernelTable {
    pub fn new(k: f64, n: usize, spacing: f64) -> Self {
        let m = 2 * n;
        let wrap = |i: usize| if i < n { i as i64 } else { i as i64 - m as i64 };
        let spatial: Vec<Complex64> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let (row, col) = (idx / m, idx % m);
                if row == n || col == n {
                    // offset ±n never occurs between cells of an n-grid
                    Complex64::new(0.0, 0.0)
                } else {
                    cell_integral(k, spacing, wrap(col), wrap(row))
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        let mut table = KernelTable {
            n,
            spacing,
            hat: spatial.clone(),
            spatial,
            fft,
            ifft,
        };
        let mut hat = std::mem::take(&mut table.hat);
        table.fft2(&mut hat, false);
        table.hat = hat;
        table
    }

    /// Entry for the offset `(di, dj)` between grid cells.
    pub fn at(&self, di: i64, dj: i64) -> Complex64 {
        let m = 2 * self.n as i64;
        self.spatial[(dj.rem_euclid(m) * m + di.rem_euclid(m)) as usize]
    }

    fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let m = 2 * self.n;
        let plan = if inverse { &self.ifft } else { &self.fft };
        data.par_chunks_mut(m).for_each(|row| plan.process(row));
        transpose(data, m);
        data.par_chunks_mut(m).for_each(|row| plan.process(row));
        transpose(data, m);
    }

    /// `(K * w)_i = Σ_j K[i - j] w_j` for a row-major `n × n` grid vector.
    pub fn convolve(&self, w: &[Complex64]) -> Vec<Complex64> {
        let (n, m) = (self.n, 2 * self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for row in 0..n {
            buf[row * m..row * m + n].copy_from_slice(&w[row * n..(row + 1) * n]);
        }
        self.fft2(&mut buf, false);
        buf.par_iter_mut().zip(self.hat.par_iter()).for_each(|(b, h)| *b *= h);
        self.fft2(&mut buf, true);
        let scale = 1.0 / (m * m) as f64;
        (0..n * n).map(|idx| buf[(idx / n) * m + idx % n] * scale).collect()
    }
}

fn transpose(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_interval;

    #[test]
    fn log_square_matches_quadrature() {
        // split at the singular corner so each piece is a smooth-in-angle polar integral
        for a in [0.5, 0.01, 2.0] {
            let quarter = 2.0 * integrate_interval(40, 0.0, PI / 4.0, |t| {
                let rmax = a / t.cos();
                // ∫₀^R r ln r dr = R²(2 ln R − 1)/4
                rmax * rmax * (2.0 * rmax.ln() - 1.0) / 4.0
            });
            assert!((4.0 * quarter - log_square_integral(a)).abs() < 1e-12 * (1.0 + a * a));
        }
    }

    #[test]
    fn regular_part_is_continuous() {
        let k = 3.0;
        let d = (phi_regular(k, 1e-7) - phi_regular(k, 0.0)).norm();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn self_cell_matches_polar_quadrature() {
        let (k, h) = (2.0, 0.05);
        let a = 0.5 * h;
        // polar about the centre over 8 triangles, r = R s² to smooth the log singularity
        let polar = |part: fn(Complex64) -> f64| {
            integrate_interval(48, 0.0, PI / 4.0, |t| {
                let rmax = a / t.cos();
                integrate_interval(48, 0.0, 1.0, |u| {
                    let r = rmax * u * u;
                    2.0 * rmax * u * r * part(phi(k, r))
                })
            })
        };
        let oracle = Complex64::new(8.0 * polar(|z| z.re), 8.0 * polar(|z| z.im));
        let got = cell_integral(k, h, 0, 0);
        assert!((got - oracle).norm() < 1e-11 * oracle.norm(), "{got} vs {oracle}");
    }

    #[test]
    fn fft_convolution_matches_direct_sum() {
        let n = 6;
        let t = KernelTable::new(1.5, n, 0.1);
        let w: Vec<Complex64> = (0..n * n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let fast = t.convolve(&w);
        for i in 0..n * n {
            let (ix, iy) = ((i % n) as i64, (i / n) as i64);
            let direct: Complex64 = (0..n * n)
                .map(|j| t.at(ix - (j % n) as i64, iy - (j / n) as i64) * w[j])
                .sum();
            assert!((fast[i] - direct).norm() < 1e-13);
        }
    }
}
