use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use super::solve::{far_field, LsOperator};
use super::{Contrast, Incident};
use crate::domain::DomainShape;
use crate::error::{Error, Result};

/// Far-field angles used for the norms.
const ANGLES: usize = 128;
/// Allowed relative change of the floor under mesh doubling.
const STABLE_CHANGE: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct EvidenceEntry {
    pub k: f64,
    pub incident: String,
    pub norm_coarse: f64,
    pub norm_fine: f64,
    pub relative_change: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvidenceReport {
    pub mesh: usize,
    pub mesh_fine: usize,
    pub entries: Vec<EvidenceEntry>,
    /// `min ‖u^∞‖_{L²(S¹)}` over the `(k, incident)` grid on each mesh.
    pub floor_coarse: f64,
    pub floor_fine: f64,
    pub argmin: (f64, String),
    pub stable: bool,
    /// Raised when the floor drops by half or more under refinement.
    pub vanishing_trend: bool,
    pub pass: bool,
}

/// `count − 1` plane waves at equally spaced angles plus one wave that vanishes at the first
/// corner of the shape (or at the origin for smooth shapes).
pub fn standard_incidents(shape: &DomainShape, count: usize) -> Vec<Incident> {
    let planes = count.saturating_sub(1).max(1);
    let mut out: Vec<Incident> = (0..planes)
        .map(|j| Incident::Plane {
            angle: TAU * j as f64 / planes as f64,
        })
        .collect();
    let point = shape
        .corners()
        .into_iter()
        .max_by(|a, b| (a[0] + a[1]).total_cmp(&(b[0] + b[1])))
        .unwrap_or([0.0, 0.0]);
    out.push(Incident::PointNull {
        point,
        angles: [0.0, FRAC_PI_2],
    });
    out
}

/// Far-field norms over the `(k, incident)` grid on meshes `mesh` and `2·mesh`.
pub fn scattering_evidence(
    shape: &DomainShape,
    contrast: &Contrast,
    k_list: &[f64],
    incidents: &[Incident],
    mesh: usize,
) -> Result<EvidenceReport> {
    if k_list.is_empty() || incidents.is_empty() {
        return Err(Error::InvalidArgument("need at least one wavenumber and one incident".into()));
    }
    let mut entries = Vec::new();
    for &k in k_list {
        let coarse = LsOperator::new(k, contrast, shape, mesh)?;
        let fine = LsOperator::new(k, contrast, shape, 2 * mesh)?;
        for inc in incidents {
            let a = far_field(&coarse.solve(inc)?, ANGLES).l2_norm();
            let b = far_field(&fine.solve(inc)?, ANGLES).l2_norm();
            entries.push(EvidenceEntry {
                k,
                incident: inc.label(),
                norm_coarse: a,
                norm_fine: b,
                relative_change: (a - b).abs() / b.max(f64::MIN_POSITIVE),
            });
        }
    }
    let floor_coarse = entries.iter().map(|e| e.norm_coarse).fold(f64::INFINITY, f64::min);
    let worst = entries
        .iter()
        .min_by(|a, b| a.norm_fine.total_cmp(&b.norm_fine))
        .expect("non-empty grid");
    let floor_fine = worst.norm_fine;
    let argmin = (worst.k, worst.incident.clone());
    let stable = (floor_coarse - floor_fine).abs() <= STABLE_CHANGE * floor_fine;
    let vanishing_trend = floor_fine <= 0.5 * floor_coarse;
    Ok(EvidenceReport {
        mesh,
        mesh_fine: 2 * mesh,
        pass: floor_fine > 0.0 && floor_coarse > 0.0 && stable && !vanishing_trend,
        entries,
        floor_coarse,
        floor_fine,
        argmin,
        stable,
        vanishing_trend,
    })
}
