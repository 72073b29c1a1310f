use rayon::prelude::*;
use serde::Serialize;

use super::{ball_lattice, directions};
use crate::domain::DomainShape;
use crate::error::{Error, Result};
use crate::field::{dot, norm, Field};

#[derive(Clone, Debug, Serialize)]
pub struct NondegReport {
    pub eps: f64,
    pub m: u32,
    /// `min_x sup_{B(x, ε|x|)} |u| / |x|^{m+2}` over sampled `x ∈ D̄ ∩ B̄_{1/2}`.
    pub floor: f64,
    /// The same at doubled resolution.
    pub floor_refined: f64,
    pub argmin: Vec<f64>,
    pub stable: bool,
    pub pass: bool,
}

fn floor_at(u: &dyn Field, domain: &DomainShape, m: u32, eps: f64, resolution: usize) -> (f64, Vec<f64>) {
    let n = u.dim();
    let dir_count = if n == 2 { 8 * resolution } else { 4 * resolution * resolution };
    let centres: Vec<Vec<f64>> = [0.5, 0.25, 0.125]
        .iter()
        .flat_map(|&r| directions(n, dir_count).into_iter().map(move |d| d.iter().map(|v| v * r).collect::<Vec<f64>>()))
        .filter(|x| domain.signed_distance(x) <= 1e-12)
        .collect();
    let local = ball_lattice(n, 2 * resolution + 1);
    centres
        .par_iter()
        .map(|x| {
            let r = norm(x);
            let rad = eps * r;
            let mut y = vec![0.0; n];
            let sup = local.iter().fold(0.0f64, |acc, z| {
                y.iter_mut().zip(x.iter().zip(z)).for_each(|(yi, (xi, zi))| *yi = xi + rad * zi);
                acc.max(u.value(&y).abs())
            });
            (sup / r.powi(m as i32 + 2), x.clone())
        })
        .reduce(
            || (f64::INFINITY, Vec::new()),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        )
}

/// Lower bound for `sup_{B(x,ε|x|)} |u| / |x|^{m+2}` on the closed domain near the origin,
/// with a refinement check. Passes when the floor is positive and moves by less than 10%.
pub fn nondegeneracy_check(
    u: &dyn Field,
    domain: &DomainShape,
    m: u32,
    eps: f64,
    resolution: usize,
) -> Result<NondegReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} outside (0, 1)")));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("resolution must be at least 2".into()));
    }
    if domain.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: domain.dim(),
        });
    }
    let (floor, argmin) = floor_at(u, domain, m, eps, resolution);
    let (floor_refined, _) = floor_at(u, domain, m, eps, 2 * resolution);
    if !floor.is_finite() {
        return Err(Error::DegenerateDomain);
    }
    let stable = (floor - floor_refined).abs() <= 0.1 * floor_refined.max(floor);
    Ok(NondegReport {
        eps,
        m,
        floor,
        floor_refined,
        argmin,
        stable,
        pass: floor > 0.0 && floor_refined > 0.0 && stable,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessScale {
    pub r: f64,
    /// `max |x·e| / r` over sampled boundary points in `B_r`.
    pub worst: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessReport {
    pub delta: f64,
    pub normal: Vec<f64>,
    pub scales: Vec<FlatnessScale>,
    /// Largest tested `r` such that the slab condition holds at `r` and every smaller scale;
    /// zero when it already fails at the smallest.
    pub r: f64,
}

/// Largest dyadic `r = 2^{-j}`, `j = 0..=j_max`, with `∂D ∩ B_r ⊂ {|x·e| ≤ δr}`.
pub fn weak_flatness_check(
    domain: &DomainShape,
    e: &[f64],
    delta: f64,
    j_max: u32,
) -> Result<FlatnessReport> {
    if e.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: e.len(),
        });
    }
    let l = norm(e);
    if !(l > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument("need a nonzero normal and δ > 0".into()));
    }
    let e: Vec<f64> = e.iter().map(|v| v / l).collect();
    let scales = (0..=j_max)
        .map(|j| {
            let r = 0.5f64.powi(j as i32);
            let pts = domain.boundary_points(r, 256)?;
            let worst = pts.iter().map(|x| dot(x, &e).abs() / r).fold(0.0, f64::max);
            Ok(FlatnessScale {
                r,
                worst,
                ok: worst <= delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = 0.0;
    for s in scales.iter().rev() {
        if !s.ok {
            break;
        }
        r = s.r;
    }
    Ok(FlatnessReport {
        delta,
        normal: e,
        scales,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::Fixture;
    use crate::field::ConePoly;
    use crate::poly::QPoly;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn nondegenerate_fixtures() {
        for f in [
            Fixture::quadrant(),
            Fixture::parse("halfspace(1,1,0)").unwrap(),
            Fixture::parse("fullspace(x1, 0)").unwrap(),
        ] {
            let rep = nondegeneracy_check(f.field.as_ref(), &f.domain, f.m, 0.5, 8).unwrap();
            assert!(rep.pass, "{}: {rep:?}", f.name);
        }
    }

    #[test]
    fn zero_field_is_degenerate() {
        let z = ConePoly::whole(QPoly::zero(2));
        let rep = nondegeneracy_check(&z, &DomainShape::Quadrant, 2, 0.5, 4).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.floor, 0.0);
    }

    #[test]
    fn flatness_examples() {
        let hs = DomainShape::HalfSpace { normal: vec![0.0, 1.0] };
        for d in [0.2, 0.1, 0.05] {
            assert_eq!(weak_flatness_check(&hs, &[0.0, 1.0], d, 12).unwrap().r, 1.0);
        }
        let sec = DomainShape::Sector { theta0: FRAC_PI_2 };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(weak_flatness_check(&sec, &[-s, s], 0.1, 12).unwrap().r, 0.0);
        let graph = DomainShape::LipschitzGraph { coeff: 1.0, exponent: 1.5 };
        let mut last = f64::INFINITY;
        for d in [0.4, 0.2, 0.1, 0.05] {
            let r = weak_flatness_check(&graph, &[0.0, 1.0], d, 20).unwrap().r;
            assert!(r > 0.0 && r <= last);
            last = r;
        }
        assert!(last < 0.01);
        assert!(weak_flatness_check(&DomainShape::Whole { n: 2 }, &[0.0, 1.0], 0.1, 4).is_err());
    }
}
