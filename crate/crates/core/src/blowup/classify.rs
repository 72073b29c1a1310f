use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SupportClass {
    Empty,
    /// Support `{x·normal ≥ 0}`.
    Halfspace { normal: [f64; 2] },
    Fullspace,
    /// Single arc of opening `theta0` centred on `bisector`.
    Sector { theta0: f64, bisector: [f64; 2] },
    Other { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub class: SupportClass,
    pub max_abs: f64,
    /// Fraction of angles in the support.
    pub support_fraction: f64,
    /// Fraction of angles between the two thresholds.
    pub ambiguous_fraction: f64,
    /// `(start angle, opening)` of each support arc.
    pub arcs: Vec<(f64, f64)>,
}

const ANGLES: usize = 3600;
const RADII: [f64; 5] = [0.5, 0.625, 0.75, 0.875, 1.0];
/// Interior nodal lines narrower than this are closed up.
const GAP_FILL: f64 = 0.05;
/// Opening accepted as a half-plane.
const HALF_PLANE_TOL: f64 = 0.02;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    On,
    Maybe,
    Off,
}

/// Maximal circular runs of `true`, as `(start index, length)`.
fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let n = mask.len();
    let Some(start) = (0..n).find(|&i| !mask[i]) else {
        return vec![(0, n)];
    };
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let idx = (start + i) % n;
        if mask[idx] {
            let s = idx;
            let mut len = 0;
            while i < n && mask[(start + i) % n] {
                len += 1;
                i += 1;
            }
            out.push((s, len));
        } else {
            i += 1;
        }
    }
    out
}

/// Support of a planar field read on the annulus `1/2 ≤ |x| ≤ 1`.
///
/// An angle is in the support when `|v| > 10·tol·max|v|` somewhere on its ray, out of it below
/// `tol·max|v|`; angles in between join the support only when attached to it.
pub fn classify_blowup_support(v: &dyn Field, tol: f64) -> Result<ClassifyReport> {
    if v.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: v.dim(),
        });
    }
    if !(tol > 0.0 && tol < 0.1) {
        return Err(Error::InvalidArgument(format!("threshold {tol} outside (0, 0.1)")));
    }
    let step = TAU / ANGLES as f64;
    let amp: Vec<f64> = (0..ANGLES)
        .into_par_iter()
        .map(|k| {
            let t = step * k as f64;
            RADII
                .iter()
                .map(|r| v.value(&[r * t.cos(), r * t.sin()]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let max_abs = amp.iter().copied().fold(0.0, f64::max);
    let empty = |class| ClassifyReport {
        class,
        max_abs,
        support_fraction: 0.0,
        ambiguous_fraction: 0.0,
        arcs: Vec::new(),
    };
    if !(max_abs > 0.0) {
        return Ok(empty(SupportClass::Empty));
    }
    let marks: Vec<Mark> = amp
        .iter()
        .map(|&a| {
            if a > 10.0 * tol * max_abs {
                Mark::On
            } else if a < tol * max_abs {
                Mark::Off
            } else {
                Mark::Maybe
            }
        })
        .collect();
    let ambiguous_fraction = marks.iter().filter(|&&m| m == Mark::Maybe).count() as f64 / ANGLES as f64;
    let mut support: Vec<bool> = marks.iter().map(|&m| m == Mark::On).collect();
    // grow into attached ambiguous angles
    loop {
        let mut changed = false;
        for i in 0..ANGLES {
            if !support[i]
                && marks[i] == Mark::Maybe
                && (support[(i + ANGLES - 1) % ANGLES] || support[(i + 1) % ANGLES])
            {
                support[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // close thin gaps
    let gaps: Vec<bool> = support.iter().map(|s| !s).collect();
    let max_gap = (GAP_FILL / step).round() as usize;
    if support.iter().any(|&s| s) {
        for (s, len) in runs(&gaps) {
            if len <= max_gap {
                for i in 0..len {
                    support[(s + i) % ANGLES] = true;
                }
            }
        }
    }
    let arcs: Vec<(f64, f64)> = if support.iter().all(|&s| s) {
        vec![(0.0, TAU)]
    } else if support.iter().any(|&s| s) {
        runs(&support)
            .into_iter()
            .map(|(s, len)| (step * s as f64 - 0.5 * step, step * len as f64))
            .collect()
    } else {
        Vec::new()
    };
    let support_fraction = support.iter().filter(|&&s| s).count() as f64 / ANGLES as f64;
    let class = if ambiguous_fraction > 0.05 {
        SupportClass::Other {
            reason: format!("{:.1}% of angles between thresholds", 100.0 * ambiguous_fraction),
        }
    } else if arcs.is_empty() {
        SupportClass::Empty
    } else if support_fraction == 1.0 {
        SupportClass::Fullspace
    } else if arcs.len() > 1 {
        SupportClass::Other {
            reason: format!("{} disjoint support arcs", arcs.len()),
        }
    } else {
        let (start, theta0) = arcs[0];
        let mid = start + 0.5 * theta0;
        let bisector = [mid.cos(), mid.sin()];
        if (theta0 - PI).abs() <= HALF_PLANE_TOL {
            SupportClass::Halfspace { normal: bisector }
        } else {
            SupportClass::Sector { theta0, bisector }
        }
    };
    Ok(ClassifyReport {
        class,
        max_abs,
        support_fraction,
        ambiguous_fraction,
        arcs,
    })
}
