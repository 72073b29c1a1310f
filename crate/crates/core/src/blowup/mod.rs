//! Blowup sequences and free-boundary diagnostics on sampled or formula-backed fields.

mod classify;
mod decay;
mod edge;
mod fixtures;
mod nondeg;
mod sequence;

pub use classify::{classify_blowup_support, ClassifyReport, SupportClass};
pub use decay::{decay_rate_check, fine_decay_check, BoundFit, DecayReport, FineDecayReport, Stratum};
pub use edge::{edge_probe, edge_probe_sampled, EdgeReport};
pub use fixtures::Fixture;
pub use nondeg::{nondegeneracy_check, weak_flatness_check, FlatnessReport, FlatnessScale, NondegReport};
pub use sequence::{
    blowup_sequence, dyadic_radii, homogeneity_degree, rescale, BlowupSequence, DegreeFit,
};

use std::f64::consts::TAU;

use crate::poly::sphere_points;

/// Unit directions: uniform angles from `0` in the plane, Halton points on `S²`.
pub(crate) fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        (0..count)
            .map(|k| {
                let t = TAU * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        sphere_points(n, count)
    }
}

/// Points of the closed unit ball on a cubic lattice with `per_axis` nodes per side.
pub(crate) fn ball_lattice(n: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let h = 2.0 / (per_axis - 1) as f64;
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut i| {
            let mut x = vec![0.0; n];
            for d in (0..n).rev() {
                x[d] = -1.0 + h * (i % per_axis) as f64;
                i /= per_axis;
            }
            x
        })
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12)
        .collect()
}
