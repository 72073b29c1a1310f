use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use puruspe::{Jn, Yn};

use super::kernel::phi;
use super::Incident;
use crate::error::{Error, Result};
use crate::quadrature::gl_interval;

fn jn(n: u32, x: f64) -> f64 {
    Jn(n, x)
}

fn djn(n: u32, x: f64) -> f64 {
    if n == 0 {
        -Jn(1, x)
    } else {
        0.5 * (Jn(n - 1, x) - Jn(n + 1, x))
    }
}

fn hn(n: u32, x: f64) -> Complex64 {
    Complex64::new(Jn(n, x), Yn(n, x))
}

fn dhn(n: u32, x: f64) -> Complex64 {
    if n == 0 {
        -hn(1, x)
    } else {
        (hn(n - 1, x) - hn(n + 1, x)) * 0.5
    }
}

/// Highest angular order kept in the disk series.
pub fn disk_series_max_order(k: f64, h: f64, radius: f64) -> u32 {
    let kappa = (k * k + h).sqrt();
    (kappa.max(k) * radius + 20.0).ceil() as u32
}

/// Far field of a plane wave at `incident_angle` scattered by the disk of `radius` centred at
/// the origin with constant contrast `h`, by separation of variables.
///
/// Inside, `u = Σ aₙ Jₙ(κr)e^{inθ}` with `κ² = k² + h`; outside, `u = u₀ + Σ bₙ Hₙ(kr)e^{inθ}`;
/// `u` and `∂ᵣu` are continuous at `r = radius`.
pub fn disk_series_far_field(k: f64, h: f64, radius: f64, incident_angle: f64, angles: &[f64]) -> Result<Vec<Complex64>> {
    if !(k > 0.0 && radius > 0.0 && k * k + h > 0.0) {
        return Err(Error::InvalidArgument("need k > 0, radius > 0 and k² + h > 0".into()));
    }
    let kappa = (k * k + h).sqrt();
    let (x, y) = (k * radius, kappa * radius);
    let max_order = disk_series_max_order(k, h, radius);
    let mut coeffs = Vec::new();
    for n in 0..=max_order {
        let num = k * djn(n, x) * jn(n, y) - kappa * djn(n, y) * jn(n, x);
        let den = hn(n, x) * (kappa * djn(n, y)) - dhn(n, x) * (k * jn(n, y));
        let c = num / den;
        if !c.is_finite() {
            break;
        }
        coeffs.push(c);
    }
    let pref = Complex64::from_polar((2.0 / (PI * k)).sqrt(), -FRAC_PI_4);
    Ok(angles
        .iter()
        .map(|&t| {
            let s: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| {
                    let w = if n == 0 { 1.0 } else { 2.0 * (n as f64 * (t - incident_angle)).cos() };
                    c * w
                })
                .sum();
            pref * s
        })
        .collect())
}

/// First Born approximation `h ∫_disk Φ(x − y) u₀(y) dy` at a point `x` inside the disk, by
/// polar quadrature centred at `x` with `ρ = ρ_max s²` to absorb the logarithm.
pub fn born_disk_scattered(k: f64, h: f64, center: [f64; 2], radius: f64, incident: &Incident, x: [f64; 2]) -> Complex64 {
    const ANGLES: usize = 128;
    let rel = [x[0] - center[0], x[1] - center[1]];
    let rr = rel[0] * rel[0] + rel[1] * rel[1];
    let radial = gl_interval(32, 0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..ANGLES {
        let t = TAU * j as f64 / ANGLES as f64;
        let e = [t.cos(), t.sin()];
        let p = rel[0] * e[0] + rel[1] * e[1];
        let rho_max = -p + (p * p - rr + radius * radius).max(0.0).sqrt();
        for &(s, w) in &radial {
            let rho = rho_max * s * s;
            let y = [x[0] + rho * e[0], x[1] + rho * e[1]];
            acc += phi(k, rho) * incident.eval(k, &y) * (w * 2.0 * rho_max * s * rho);
        }
    }
    acc * (h * TAU / ANGLES as f64)
}
