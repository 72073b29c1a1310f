//! Small least-squares fits used by the diagnostics.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Max absolute deviation of the data from the line.
    pub max_residual: f64,
}

/// Least-squares line through `(x, y)` pairs; needs at least two distinct `x`.
pub fn linear_fit(pts: &[(f64, f64)]) -> LineFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    LineFit {
        slope,
        intercept,
        max_residual,
    }
}

/// Coefficients `(c0, c1, c2)` of the least-squares parabola `c0 + c1 x + c2 x²`.
pub fn quadratic_fit(pts: &[(f64, f64)]) -> [f64; 3] {
    use nalgebra::{Matrix3, Vector3};
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for &(x, y) in pts {
        let v = Vector3::new(1.0, x, x * x);
        a += v * v.transpose();
        b += v * y;
    }
    let c = a.lu().solve(&b).unwrap_or_else(Vector3::zeros);
    [c[0], c[1], c[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_recover_coefficients() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let f = linear_fit(&pts);
        assert!((f.slope + 2.0).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let x = i as f64 * 0.3;
                (x, 1.0 + x - 0.5 * x * x)
            })
            .collect();
        let c = quadratic_fit(&pts);
        assert!((c[2] + 0.5).abs() < 1e-9 && (c[1] - 1.0).abs() < 1e-9);
    }
}
