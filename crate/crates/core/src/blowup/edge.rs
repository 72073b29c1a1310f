use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::ball_lattice;
use crate::error::{Error, Result};
use crate::field::{dot, norm, ConePoly, Field};
use crate::poly::{f64_to_rational, QPoly};

#[derive(Clone, Debug, Serialize)]
pub struct EdgeReport {
    pub edge: Vec<f64>,
    /// Vanishing order of `v` at the edge point.
    pub order: u32,
    /// Limit of the second blowup `v(e + rx)/r^order`, when known exactly.
    pub limit: Option<String>,
    /// `max |e·∇w|` of the limit on the unit ball.
    pub limit_max: f64,
    pub homogeneous: Option<bool>,
    /// `(r, max |e·∇w_r|)` along the second blowup sequence.
    pub sequence: Vec<(f64, f64)>,
    pub pass: bool,
}

fn sequence_max(v: &dyn Field, e: &[f64], order: u32, pts: &[Vec<f64>]) -> Vec<(f64, f64)> {
    (2..=10)
        .map(|j| {
            let r = 0.5f64.powi(j);
            let scale = r.powi(order as i32 - 1);
            let worst = pts
                .par_iter()
                .map(|x| {
                    let y: Vec<f64> = e.iter().zip(x).map(|(ei, xi)| ei + r * xi).collect();
                    // ∇_x [v(e + r x)/r^order] = r^{1-order} ∇v(e + r x)
                    dot(e, &v.gradient(&y)).abs() / scale
                })
                .reduce(|| 0.0, f64::max);
            (r, worst)
        })
        .collect()
}

fn unit_vector(e: &[f64], n: usize) -> Result<Vec<f64>> {
    if e.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: e.len(),
        });
    }
    let l = norm(e);
    if (l - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("edge direction must be a unit vector".into()));
    }
    Ok(e.to_vec())
}

/// Second blowup at the boundary point `e` of a piecewise-polynomial field.
///
/// The limit is the lowest-order Taylor part of `v(e + ·)` restricted to the cone constraints
/// active at `e`; its derivative along `e` is evaluated exactly and sampled on the unit ball.
pub fn edge_probe(v: &ConePoly, e: &[f64]) -> Result<EdgeReport> {
    let n = v.dim();
    let e = unit_vector(e, n)?;
    let active: Vec<Vec<f64>> = v
        .normals()
        .iter()
        .filter(|nu| dot(nu, &e).abs() < 1e-12)
        .cloned()
        .collect();
    if active.is_empty() {
        return Err(Error::InvalidArgument("edge point is not on the support boundary".into()));
    }
    let er: Vec<BigRational> = e
        .iter()
        .map(|&c| f64_to_rational(c).ok_or_else(|| Error::InvalidArgument("non-finite direction".into())))
        .collect::<Result<_>>()?;
    let shifted = v.poly().translate(&er)?;
    let order = shifted.min_degree().ok_or(Error::ZeroField)?;
    let limit = shifted.homogeneous_part(order);
    let along = (0..n).fold(QPoly::zero(n), |acc, i| acc + limit.derivative(i).scale(&er[i]));
    let along_f = along.to_f64();
    let pts: Vec<Vec<f64>> = ball_lattice(n, 11)
        .into_iter()
        .filter(|z| active.iter().all(|nu| dot(nu, z) >= 0.0))
        .collect();
    let limit_max = if along.is_zero() {
        0.0
    } else {
        pts.par_iter().map(|z| along_f.eval_f64(z).abs()).reduce(|| 0.0, f64::max)
    };
    let homogeneous = v.poly().degree().is_some_and(|d| v.poly().is_homogeneous(d));
    Ok(EdgeReport {
        sequence: sequence_max(v, &e, order, &pts),
        edge: e,
        order,
        limit: Some(limit.to_string()),
        limit_max,
        homogeneous: Some(homogeneous),
        pass: homogeneous && limit_max < 1e-10,
    })
}

/// Numerical second blowup for fields without an exact form; passes when the last
/// `max |e·∇w_r|` is below `tol`.
pub fn edge_probe_sampled(v: &dyn Field, e: &[f64], order: u32, tol: f64) -> Result<EdgeReport> {
    let n = v.dim();
    let e = unit_vector(e, n)?;
    let pts = ball_lattice(n, 11);
    let sequence = sequence_max(v, &e, order, &pts);
    let last = sequence.last().map_or(f64::INFINITY, |s| s.1);
    Ok(EdgeReport {
        edge: e,
        order,
        limit: None,
        limit_max: last,
        homogeneous: None,
        sequence,
        pass: last < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::Fixture;
    use crate::poly::rat;

    #[test]
    fn wedge_edge_is_invariant() {
        let f = Fixture::wedge3d();
        let rep = edge_probe(f.cone.as_ref().unwrap(), f.edge.as_ref().unwrap()).unwrap();
        assert!(rep.pass && rep.limit_max == 0.0, "{rep:?}");
        assert_eq!(rep.order, 4);
        assert!(rep.sequence.iter().all(|s| s.1 < 1e-10));
    }

    #[test]
    fn halfspace_edge_limit() {
        let f = Fixture::halfspace3d().unwrap();
        let rep = edge_probe(f.cone.as_ref().unwrap(), f.edge.as_ref().unwrap()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.order, 2);
        assert_eq!(rep.limit.as_deref(), Some("1/2 * x3^2"));
        // finite-r blowups approach the limit linearly
        let s = &rep.sequence;
        assert!(s[s.len() - 1].1 < s[0].1 / 100.0);
    }

    #[test]
    fn injected_dependence_is_flagged() {
        let f = Fixture::wedge3d_injected(&rat(1, 10)).unwrap();
        let rep = edge_probe(f.cone.as_ref().unwrap(), f.edge.as_ref().unwrap()).unwrap();
        assert!(!rep.pass);
        assert!(rep.limit_max > 1e-3);
    }

    #[test]
    fn interior_point_is_rejected() {
        let f = Fixture::wedge3d();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(edge_probe(f.cone.as_ref().unwrap(), &[s, s, 0.0]).is_err());
    }
}
