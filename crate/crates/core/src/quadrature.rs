//! Gauss–Legendre based rules on intervals, circles, 2-spheres and balls.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Cached `(node, weight)` pairs of the `n`-point rule on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> Arc<[(f64, f64)]> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<[(f64, f64)]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("at least one node"));
            let mut pairs = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs.into()
        })
        .clone()
}

/// `n`-point rule mapped to `[a, b]`.
pub fn gl_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| (c + h * x, h * w))
        .collect()
}

pub fn integrate_interval(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    gl_interval(n, a, b).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Weighted point set in `dim` dimensions.
#[derive(Clone, Debug)]
pub struct PointRule {
    pub dim: usize,
    points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PointRule {
    pub fn new(dim: usize) -> Self {
        PointRule {
            dim,
            points: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.points.extend_from_slice(x);
        self.weights.push(w);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks(self.dim).zip(self.weights.iter().copied())
    }

    /// Parallel evaluation, fixed-order summation.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        let vals: Vec<f64> = self
            .points
            .par_chunks(self.dim)
            .map(|x| f(x))
            .collect();
        vals.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Same as [`integrate`](Self::integrate) for several integrands sharing evaluation work.
    pub fn integrate_many<const K: usize>(&self, f: impl Fn(&[f64]) -> [f64; K] + Sync) -> [f64; K] {
        let vals: Vec<[f64; K]> = self
            .points
            .par_chunks(self.dim)
            .map(|x| f(x))
            .collect();
        let mut out = [0.0; K];
        for (v, w) in vals.iter().zip(&self.weights) {
            for k in 0..K {
                out[k] += v[k] * w;
            }
        }
        out
    }

    /// The rule pushed forward by `x ↦ r x` (weights scale by `r^{jac_power}`).
    pub fn scaled(&self, r: f64, jac_power: i32) -> PointRule {
        PointRule {
            dim: self.dim,
            points: self.points.iter().map(|x| x * r).collect(),
            weights: self.weights.iter().map(|w| w * r.powi(jac_power)).collect(),
        }
    }
}

/// Break angles in `[0, 2π)` where the lines `{x·ν = 0}` cross the unit circle.
pub fn circle_breaks(normals: &[Vec<f64>]) -> Vec<f64> {
    let mut out: Vec<f64> = normals
        .iter()
        .flat_map(|nu| {
            let t = nu[1].atan2(nu[0]) + 0.5 * PI;
            [t.rem_euclid(TAU), (t + PI).rem_euclid(TAU)]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out
}

/// Composite Gauss rule on `S¹` with `order` nodes per arc between consecutive breaks.
pub fn circle_rule(order: usize, breaks: &[f64]) -> PointRule {
    let mut rule = PointRule::new(2);
    let mut b: Vec<f64> = if breaks.is_empty() {
        vec![0.0, 0.5 * PI, PI, 1.5 * PI]
    } else {
        breaks.to_vec()
    };
    b.push(b[0] + TAU);
    for w in b.windows(2) {
        for (t, wt) in gl_interval(order, w[0], w[1]) {
            rule.push(&[t.cos(), t.sin()], wt);
        }
    }
    rule
}

/// Rotation with third column `axis`, so that `R e₃ = axis`.
fn frame_from_axis(axis: &[f64]) -> [[f64; 3]; 3] {
    let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    let e3 = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let seed = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = seed[0] * e3[0] + seed[1] * e3[1] + seed[2] * e3[2];
    let mut e1 = [seed[0] - d * e3[0], seed[1] - d * e3[1], seed[2] - d * e3[2]];
    let n1 = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1.iter_mut().for_each(|v| *v /= n1);
    let e2 = [
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    ];
    [
        [e1[0], e2[0], e3[0]],
        [e1[1], e2[1], e3[1]],
        [e1[2], e2[2], e3[2]],
    ]
}

/// Product rule on `S²`: Gauss in `cos(polar)` split at the equator, trapezoid in azimuth.
/// The polar axis is `axis`, so integrands cut by `{x·axis = 0}` stay smooth per piece.
pub fn sphere2_rule(order: usize, axis: &[f64]) -> PointRule {
    let frame = frame_from_axis(axis);
    let naz = 2 * order + 2;
    let mut rule = PointRule::new(3);
    for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
        for (t, wt) in gl_interval(order, lo, hi) {
            let s = (1.0 - t * t).max(0.0).sqrt();
            for k in 0..naz {
                let phi = TAU * k as f64 / naz as f64;
                let local = [s * phi.cos(), s * phi.sin(), t];
                let x: Vec<f64> = (0..3)
                    .map(|i| (0..3).map(|j| frame[i][j] * local[j]).sum())
                    .collect();
                rule.push(&x, wt * TAU / naz as f64);
            }
        }
    }
    rule
}

/// Unit-sphere rule adapted to the cut hyperplanes `{x·ν = 0}`.
pub fn sphere_rule(n: usize, order: usize, normals: &[Vec<f64>]) -> Result<PointRule> {
    match n {
        2 => Ok(circle_rule(order, &circle_breaks(normals))),
        3 => Ok(sphere2_rule(
            order,
            normals.first().map_or(&[0.0, 0.0, 1.0][..], |v| v.as_slice()),
        )),
        _ => Err(Error::InvalidArgument(format!(
            "sphere quadrature is implemented for n = 2, 3, got {n}"
        ))),
    }
}

/// Unit-ball rule: `radial_order` Gauss nodes in radius times `sphere`.
pub fn ball_rule(sphere: &PointRule, radial_order: usize) -> PointRule {
    let n = sphere.dim;
    let mut rule = PointRule::new(n);
    let mut x = vec![0.0; n];
    for (r, wr) in gl_interval(radial_order, 0.0, 1.0) {
        let jac = r.powi(n as i32 - 1);
        for (w, ws) in sphere.iter() {
            x.iter_mut().zip(w).for_each(|(xi, wi)| *xi = r * wi);
            rule.push(&x, wr * jac * ws);
        }
    }
    rule
}

/// Node count per piece for a refinement level: `6 · 2^level`.
pub fn order_for_level(level: u32) -> usize {
    6usize << level
}
