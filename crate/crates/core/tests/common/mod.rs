//! Reference computations written independently of the library code paths they check.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use freebound::poly::{rat, MultiIndex, QPoly};

/// `∫₀^{x_n}∫₀^{t} p dt' dt`, term by term.
fn double_integrate_last(p: &QPoly) -> QPoly {
    let n = p.dim();
    let terms = p.terms().map(|(a, c)| {
        let mut b = a.0.clone();
        let k = b[n - 1] as i64;
        b[n - 1] += 2;
        (MultiIndex(b), c / rat((k + 1) * (k + 2), 1))
    });
    QPoly::from_terms(n, terms.collect::<Vec<_>>()).expect("same dimension")
}

fn tangential_laplacian(p: &QPoly) -> QPoly {
    let n = p.dim();
    (0..n - 1).fold(QPoly::zero(n), |acc, i| acc + p.derivative(i).derivative(i))
}

/// Solution of `Δu = f` with `u = ∂ₙu = 0` on `{xₙ = 0}` as the terminating series
/// `Σ_k (−1)^k I^{k+1} Δ'^k f`, `I` being double integration in `xₙ` from zero.
/// `I` and `Δ'` commute, so each term is `I Δ'` applied to the previous one.
pub fn halfspace_series(f: &QPoly) -> QPoly {
    let mut term = double_integrate_last(f);
    let mut sum = QPoly::zero(f.dim());
    let mut sign = rat(1, 1);
    while !term.is_zero() {
        sum = sum + term.scale(&sign);
        term = double_integrate_last(&tangential_laplacian(&term));
        sign = -sign;
    }
    sum
}

/// Panels of a 5-point Gauss–Legendre rule on `[a, b]`.
pub fn composite_gl(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            X.iter().zip(W).map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
        .collect()
}

/// Weiss energy at radius `r` of a planar polynomial `u` supported in `{x₂ > 0}`,
/// by polar quadrature over the upper half disk.
pub fn weiss_polar_2d(u: &QPoly, h: &QPoly, m: u32, r: f64) -> f64 {
    let uf = u.to_f64();
    let hf = h.to_f64();
    let g = [u.derivative(0).to_f64(), u.derivative(1).to_f64()];
    let thetas = composite_gl(0.0, PI, 64);
    let bulk: f64 = composite_gl(0.0, r, 16)
        .iter()
        .map(|&(rho, wr)| {
            let ring: f64 = thetas
                .iter()
                .map(|&(t, wt)| {
                    let x = [rho * t.cos(), rho * t.sin()];
                    let grad2 = g[0].eval_f64(&x).powi(2) + g[1].eval_f64(&x).powi(2);
                    wt * (grad2 + 2.0 * hf.eval_f64(&x) * uf.eval_f64(&x))
                })
                .sum();
            wr * rho * ring
        })
        .sum();
    let boundary: f64 = thetas
        .iter()
        .map(|&(t, wt)| wt * uf.eval_f64(&[r * t.cos(), r * t.sin()]).powi(2))
        .sum::<f64>()
        * r;
    let n = 2;
    let e = 2 * m as i32 + n + 2;
    bulk / r.powi(e) - (m as f64 + 2.0) * boundary / r.powi(e + 1)
}

/// Same energy in three dimensions for `u` supported in `{x₃ > 0}`, in spherical coordinates
/// over the upper half ball.
pub fn weiss_spherical_3d(u: &QPoly, h: &QPoly, m: u32, r: f64) -> f64 {
    let uf = u.to_f64();
    let hf = h.to_f64();
    let g: Vec<_> = (0..3).map(|i| u.derivative(i).to_f64()).collect();
    let polar = composite_gl(0.0, PI / 2.0, 24);
    let azimuth = composite_gl(0.0, 2.0 * PI, 48);
    let point = |rho: f64, p: f64, a: f64| [rho * p.sin() * a.cos(), rho * p.sin() * a.sin(), rho * p.cos()];
    let sphere = |rho: f64, f: &dyn Fn(&[f64; 3]) -> f64| -> f64 {
        polar
            .iter()
            .map(|&(p, wp)| {
                let ring: f64 = azimuth.iter().map(|&(a, wa)| wa * f(&point(rho, p, a))).sum();
                wp * p.sin() * ring
            })
            .sum::<f64>()
            * rho
            * rho
    };
    let bulk: f64 = composite_gl(0.0, r, 8)
        .iter()
        .map(|&(rho, wr)| {
            wr * sphere(rho, &|x| {
                let grad2: f64 = g.iter().map(|gi| gi.eval_f64(x).powi(2)).sum();
                grad2 + 2.0 * hf.eval_f64(x) * uf.eval_f64(x)
            })
        })
        .sum();
    let boundary = sphere(r, &|x| uf.eval_f64(x).powi(2));
    let e = 2 * m as i32 + 3 + 2;
    bulk / r.powi(e) - (m as f64 + 2.0) * boundary / r.powi(e + 1)
}

/// `d/dx Z_n` from the three-term recurrence.
fn deriv(z: impl Fn(i32, f64) -> f64, n: i32, x: f64) -> f64 {
    0.5 * (z(n - 1, x) - z(n + 1, x))
}

fn jn(n: i32, x: f64) -> f64 {
    let v = puruspe::Jn(n.unsigned_abs(), x);
    if n < 0 && n % 2 != 0 { -v } else { v }
}

fn yn(n: i32, x: f64) -> f64 {
    let v = puruspe::Yn(n.unsigned_abs(), x);
    if n < 0 && n % 2 != 0 { -v } else { v }
}

/// Far field of a penetrable disk (`Δu + (k² + h)u = 0` inside) hit by a plane wave from
/// `incident_angle`, by separation of variables; same normalisation as the library.
pub fn disk_far_field_series(k: f64, h: f64, radius: f64, incident_angle: f64, theta: f64) -> Complex64 {
    let kappa = (k * k + h).sqrt();
    let (a, b) = (k * radius, kappa * radius);
    let orders = (kappa.max(k) * radius).ceil() as i32 + 25;
    let coeff = |n: i32| {
        let (ja, jb) = (jn(n, a), jn(n, b));
        let (dja, djb) = (deriv(jn, n, a), deriv(jn, n, b));
        let ha = Complex64::new(ja, yn(n, a));
        let dha = Complex64::new(dja, deriv(yn, n, a));
        let num = k * dja * jb - kappa * djb * ja;
        let den = kappa * djb * ha - k * dha * jb;
        Complex64::from(num) / den
    };
    let mut sum = coeff(0);
    for n in 1..=orders {
        sum += 2.0 * coeff(n) * (n as f64 * (theta - incident_angle)).cos();
    }
    (2.0 / (PI * k)).sqrt() * Complex64::from_polar(1.0, -PI / 4.0) * sum
}

/// First-order Born far field of a disk of contrast `h`, from the Fourier transform of its
/// indicator: `2πR J₁(|ξ|R)/|ξ|` with `ξ = k(d − x̂)`.
pub fn born_disk_far_field(k: f64, h: f64, radius: f64, incident_angle: f64, theta: f64) -> Complex64 {
    let xi = [
        k * (incident_angle.cos() - theta.cos()),
        k * (incident_angle.sin() - theta.sin()),
    ];
    let s = xi[0].hypot(xi[1]);
    let ft = if s < 1e-12 {
        PI * radius * radius
    } else {
        2.0 * PI * radius * jn(1, s * radius) / s
    };
    Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), PI / 4.0) * h * ft
}

/// Sign-change roots of `sin θ (1 ∓ cos θ)` on `(0, 2π)` by bisection.
pub fn m1_residual_roots(steps: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    for sign in [1.0, -1.0] {
        let f = |t: f64| t.sin() * (1.0 - sign * t.cos());
        let grid: Vec<f64> = (1..steps).map(|i| 2.0 * PI * i as f64 / steps as f64).collect();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            if f(a) == 0.0 {
                roots.push(a);
                continue;
            }
            if f(a) * f(b) < 0.0 {
                for _ in 0..200 {
                    let c = 0.5 * (a + b);
                    if f(a) * f(c) <= 0.0 {
                        b = c;
                    } else {
                        a = c;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

/// `Δ[(x₁² − x₂²) log(1/|x|)] = −4 cos 2θ`.
pub fn log_counterexample_laplacian(x: &[f64]) -> f64 {
    -4.0 * (x[0] * x[0] - x[1] * x[1]) / (x[0] * x[0] + x[1] * x[1])
}

/// Exact rational evaluation, for spot checks of coefficient identities.
pub fn eval_rational(p: &QPoly, x: &[BigRational]) -> BigRational {
    p.terms().fold(BigRational::zero(), |acc, (a, c)| {
        let mono = a.0.iter().zip(x).fold(rat(1, 1), |m, (&e, xi)| m * num_traits::pow(xi.clone(), e as usize));
        acc + c * mono
    })
}
