//! The full check suite behind `verify-all`, one verdict per check id.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::RngExt;
use serde::Serialize;

use crate::blowup::{
    classify_blowup_support, decay_rate_check, dyadic_radii, edge_probe, fine_decay_check,
    homogeneity_degree, nondegeneracy_check, weak_flatness_check, Fixture, SupportClass,
};
use crate::domain::DomainShape;
use crate::error::{Error, Result};
use crate::field::{ConePoly, Field, FnField, RadiallyModulated};
use crate::halfspace::{halfspace_blowup_2d, harmonic_to_ab, rotate_2d, solve_halfspace_poly};
use crate::poly::{parse_poly, random, rat, QPoly};
use crate::scatter::{
    born_disk_scattered, disk_series_far_field, far_field_at, scattering_evidence,
    standard_incidents, uniform_angles, Contrast, Incident, LsOperator,
};
use crate::sector::{closed_form_roots_m1, min_abs_det_on, sector_nonexistence_certificate};
use crate::weiss::{monotonicity_scan, weiss_closed_form, weiss_w, WeissConfig};

/// Check ids in run order.
pub const CHECK_IDS: [&str; 13] = [
    "decay-order",
    "fine-decay",
    "c11-bound",
    "weiss-scaling",
    "halfspace-poly",
    "halfspace-energy",
    "halfspace-2d",
    "sector-nonexistence",
    "blowup-classification",
    "nondegeneracy",
    "weak-flatness",
    "edge-reduction",
    "scatter-evidence",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Profile::Quick => quick,
            Profile::Full => full,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub profile: Profile,
    /// Checks run on a deliberately corrupted fixture.
    pub injected: Vec<String>,
    pub results: Vec<CheckResult>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub profile: Profile,
    pub inject: Vec<String>,
    /// Restrict to these ids; all when empty.
    pub only: Vec<String>,
}

impl VerifyOptions {
    pub fn new(profile: Profile) -> Self {
        VerifyOptions {
            profile,
            inject: Vec::new(),
            only: Vec::new(),
        }
    }
}

fn known(id: &str) -> Result<()> {
    if CHECK_IDS.contains(&id) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("unknown check id '{id}'")))
    }
}

pub fn verify_all(opts: &VerifyOptions) -> Result<VerifySummary> {
    for id in opts.inject.iter().chain(&opts.only) {
        known(id)?;
    }
    let results: Vec<CheckResult> = CHECK_IDS
        .iter()
        .filter(|id| opts.only.is_empty() || opts.only.iter().any(|o| o == *id))
        .map(|id| run_check(id, opts.profile, opts.inject.iter().any(|i| i == id)))
        .collect::<Result<_>>()?;
    Ok(VerifySummary {
        profile: opts.profile,
        injected: opts.inject.clone(),
        pass: results.iter().all(|r| r.pass),
        results,
    })
}

/// Runs one check; `corrupt` swaps in the check's negative control, which must fail.
pub fn run_check(id: &str, profile: Profile, corrupt: bool) -> Result<CheckResult> {
    known(id)?;
    let start = Instant::now();
    let outcome = match id {
        "decay-order" => decay_order(corrupt),
        "fine-decay" => fine_decay(corrupt),
        "c11-bound" => c11_bound(corrupt),
        "weiss-scaling" => weiss_scaling(profile, corrupt),
        "halfspace-poly" => halfspace_poly(profile, corrupt),
        "halfspace-energy" => halfspace_energy(profile, corrupt),
        "halfspace-2d" => halfspace_2d(corrupt),
        "sector-nonexistence" => sector_nonexistence(profile, corrupt),
        "blowup-classification" => blowup_classification(corrupt),
        "nondegeneracy" => nondegeneracy(profile, corrupt),
        "weak-flatness" => weak_flatness(corrupt),
        "edge-reduction" => edge_reduction(corrupt),
        "scatter-evidence" => scatter_evidence(profile, corrupt),
        _ => unreachable!("id checked above"),
    };
    let (pass, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Ok(CheckResult {
        id: id.into(),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

type Outcome = Result<(bool, String)>;

fn fx(spec: &str) -> Result<Fixture> {
    Fixture::parse(spec)
}

fn q2(s: &str) -> Result<QPoly> {
    parse_poly(s, Some(2))
}

fn halfspace_cone(h: &QPoly, n: usize) -> Result<ConePoly> {
    let sol = solve_halfspace_poly(h, n)?;
    let mut e = vec![0.0; n];
    e[n - 1] = 1.0;
    ConePoly::new(sol.solution, vec![e])
}

fn decay_order(corrupt: bool) -> Outcome {
    let quadrant = Fixture::quadrant();
    let radii = dyadic_radii(quadrant.field.as_ref(), 1, 12);
    let fit = homogeneity_degree(quadrant.field.as_ref(), &radii)?;
    let mut ok = (fit.degree - 4.0).abs() <= 0.02 && fit.near_integer == Some(4);
    let mut detail = format!("quadrant degree {:.4}", fit.degree);
    let mut fixtures = vec![quadrant, fx("halfspace(1,1,0)")?, fx("halfspace(3,0,1)")?];
    if corrupt {
        fixtures.push(Fixture::log_counterexample(1.0)?);
    }
    for f in &fixtures {
        let radii = dyadic_radii(f.field.as_ref(), 2, 16);
        let rep = decay_rate_check(f.field.as_ref(), f.m, &radii)?;
        let pass = rep.value.pass && rep.gradient.pass;
        ok &= pass;
        detail.push_str(&format!(
            "; {} C0={:.3} C1={:.3}{}",
            f.name,
            rep.value.constant,
            rep.gradient.constant,
            if pass { "" } else { " FAILED" }
        ));
    }
    Ok((ok, detail))
}

fn fine_decay(corrupt: bool) -> Outcome {
    let mut cases: Vec<(String, Arc<dyn Field>, DomainShape, u32)> = Vec::new();
    for f in [Fixture::quadrant(), fx("halfspace(0,1,0)")?, fx("halfspace(1,1,0)")?] {
        cases.push((f.name.clone(), f.field.clone(), f.domain.clone(), f.m));
    }
    if corrupt {
        cases.push((
            "(x2)+".into(),
            Arc::new(FnField::new(2, "(x2)+", |x: &[f64]| x[1].max(0.0))),
            DomainShape::HalfSpace { normal: vec![0.0, 1.0] },
            0,
        ));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, field, domain, m) in &cases {
        let rep = fine_decay_check(field.as_ref(), domain, *m)?;
        ok &= rep.pass;
        parts.push(format!(
            "{name} value {:.3} gradient {:.3}{}",
            rep.value_constant,
            rep.gradient_constant,
            if rep.pass { "" } else { " FAILED" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c11_bound(corrupt: bool) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for f in [Fixture::quadrant(), fx("halfspace(1,1,0)")?, fx("halfspace(2,1,1)")?] {
        let radii = dyadic_radii(f.field.as_ref(), 2, 16);
        let rep = decay_rate_check(f.field.as_ref(), f.m, &radii)?;
        ok &= rep.hessian.pass;
        parts.push(format!("{} C2={:.3}", f.name, rep.hessian.constant));
    }
    let log = Fixture::log_counterexample(1.0)?;
    let radii = dyadic_radii(log.field.as_ref(), 2, 20);
    let rep = decay_rate_check(log.field.as_ref(), 0, &radii)?;
    // the counterexample must break the Hessian bound while its Laplacian stays bounded
    let control = if corrupt {
        rep.hessian.pass
    } else {
        !rep.hessian.pass && rep.hessian.log_growth > 0.0 && rep.laplacian.pass
    };
    ok &= control;
    parts.push(format!(
        "log counterexample hessian growth {:.3}/log, laplacian constant {:.3}{}",
        rep.hessian.log_growth,
        rep.laplacian.constant,
        if corrupt { " (treated as a solution)" } else { "" }
    ));
    Ok((ok, parts.join("; ")))
}

fn weiss_scaling(profile: Profile, corrupt: bool) -> Outcome {
    let steps = profile.pick(9, 17);
    let mut ok = true;
    let mut parts = Vec::new();
    for (h, m) in [("x1", 1u32), ("1", 0), ("x1^2 - x2^2", 2)] {
        let hp = q2(h)?;
        let u = halfspace_cone(&hp, 2)?;
        // a wrong homogeneity order breaks the scale invariance of W
        let order = if corrupt { m + 1 } else { m };
        let cfg = WeissConfig::geometric(order, 2, 0.5f64.powi(8), 1.0, steps)?;
        let rep = monotonicity_scan(&u, &hp, None, None, &cfg)?;
        ok &= rep.w_spread < 1e-8;
        parts.push(format!("H={h} spread {:.1e}", rep.w_spread));
    }
    let hp = q2("2 * x1 + 6 * x2")?;
    let u = RadiallyModulated::new(halfspace_cone(&hp, 2)?, &hp, 1, 0.1);
    let rem = |x: &[f64]| u.remainder(x);
    let cfg = WeissConfig::geometric(1, 2, 1.0 / 16.0, 1.0, profile.pick(5, 9))?;
    let rep = monotonicity_scan(&u, &hp, Some(&rem), None, &cfg)?;
    let slope = rep.f_slope.unwrap_or(0.0);
    ok &= rep.verdict && slope >= 1.0 - 0.1;
    parts.push(format!(
        "perturbed W+F violation {:.1e}, F slope {:.3}",
        rep.max_violation, slope
    ));
    Ok((ok, parts.join("; ")))
}

fn halfspace_poly(profile: Profile, corrupt: bool) -> Outcome {
    let count = profile.pick(20, 50);
    let mut rng = random::seeded(0x3303);
    let mut solved = 0;
    for i in 0..count {
        let n = 2 + i % 3;
        let m = rng.random_range(0..=6u32);
        let f = random::homogeneous(&mut rng, n, m);
        let mut sol = solve_halfspace_poly(&f, n)?;
        if corrupt && i == 0 {
            sol.solution = &sol.solution + &QPoly::var(n, 0).pow(m + 2);
        }
        if sol.verify().is_ok() {
            solved += 1;
        }
    }
    Ok((solved == count, format!("{solved}/{count} exact solutions verified")))
}

fn halfspace_energy(profile: Profile, corrupt: bool) -> Outcome {
    let mut rng = random::seeded(0x3304);
    let mut worst = 0.0f64;
    let mut cases = 0;
    let dims: &[(usize, u32)] = &[(2, 5), (3, profile.pick(3, 5))];
    for &(n, m_max) in dims {
        for m in 0..=m_max {
            let h = random::harmonic(&mut rng, n, m);
            if h.is_zero() {
                continue;
            }
            let exact = weiss_closed_form(&h, n)?.value;
            let mut u = halfspace_cone(&h, n)?;
            if corrupt {
                u = ConePoly::new(u.poly().scale(&rat(101, 100)), u.normals().to_vec())?;
            }
            let w = weiss_w(&u, &h, &WeissConfig::new(m, n, vec![1.0]), 1.0)?.value;
            worst = worst.max((w - exact).abs() / exact.abs());
            cases += 1;
        }
    }
    let unit = weiss_closed_form(&QPoly::one(2), 2)?;
    let unit_ok = unit.exact.coeff == rat(1, 16) && unit.exact.pi_power == 1;
    let remark = q2("2 * x1 + 6 * x2")?;
    let c_closed = weiss_closed_form(&remark, 2)?;
    let c_exact = c_closed.exact.coeff.clone() / rat(40, 1);
    let w = weiss_w(&halfspace_cone(&remark, 2)?, &remark, &WeissConfig::new(1, 2, vec![1.0]), 1.0)?.value;
    let c_quad = w / 40.0;
    let c_ok = c_exact == rat(1, 96) && (c_quad - PI / 96.0).abs() < 1e-6 * PI / 96.0;
    let rotated = rotate_2d(&remark, &rat(3, 5), &rat(4, 5))?;
    let rot_ok = weiss_closed_form(&rotated, 2)?.exact == c_closed.exact;
    let ok = worst < 1e-6 && unit_ok && c_ok && rot_ok;
    Ok((
        ok,
        format!(
            "{cases} fixtures max rel err {worst:.1e}; H=1 gives {}·π; c = {:.10} (π/96 = {:.10}); rotation {}",
            unit.exact.coeff,
            c_quad,
            PI / 96.0,
            if rot_ok { "invariant" } else { "CHANGED" }
        ),
    ))
}

fn halfspace_2d(corrupt: bool) -> Outcome {
    let mut rng = random::seeded(0x3305);
    let mut agree = 0;
    for m in 0..=5u32 {
        let h = random::harmonic(&mut rng, 2, m);
        let (_, a, b) = harmonic_to_ab(&h)?;
        let complex = halfspace_blowup_2d(m as i64, a, b)?.into_real()?;
        let target = if corrupt && m == 0 { h.scale(&rat(2, 1)) } else { h };
        let direct = solve_halfspace_poly(&target, 2)?;
        if complex.solution == direct.solution {
            agree += 1;
        }
    }
    let x1 = QPoly::var(2, 0);
    let (_, a, b) = harmonic_to_ab(&x1)?;
    let m1 = halfspace_blowup_2d(1, a, b)?.into_real()?;
    let remark_ok = m1.solution == q2("1/2 * x1 * x2^2")?;
    Ok((
        agree == 6 && remark_ok,
        format!(
            "{agree}/6 degrees agree coefficient-exactly; H = x1 gives {}",
            m1.solution
        ),
    ))
}

fn sector_nonexistence(profile: Profile, corrupt: bool) -> Outcome {
    let steps = profile.pick(200_000, 1_000_000);
    let delta = 0.05;
    let certs = sector_nonexistence_certificate(10, delta, steps)?;
    let mut ok = closed_form_roots_m1() == vec![PI];
    let mut min = f64::INFINITY;
    for c in &certs {
        let only_pi = !c.roots_found.is_empty() && c.roots_found.iter().all(|t| (t - PI).abs() <= 1e-12);
        ok &= only_pi && !c.contradiction && c.refinement_stable && c.min_abs_det > 1e-8;
        min = min.min(c.min_abs_det);
    }
    if corrupt {
        // without the margin around π the minimum collapses onto the genuine root
        let (_, v) = min_abs_det_on(1, delta, 2.0 * PI - delta, steps);
        ok &= v > 1e-8;
        min = min.min(v);
    }
    Ok((ok, format!("m = 1..10, {steps} points: roots only at π, min |det| = {min:.3e}")))
}

fn blowup_classification(corrupt: bool) -> Outcome {
    let tol = 1e-6;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut halfspaces = vec![fx("halfspace(0,1,0)")?, fx("halfspace(1,1,0)")?, fx("halfspace(2,0,1)")?, fx("halfspace(3,1,1)")?];
    if corrupt {
        halfspaces.push(Fixture::quadrant());
    }
    for f in &halfspaces {
        let c = classify_blowup_support(f.field.as_ref(), tol)?.class;
        let hit = matches!(c, SupportClass::Halfspace { .. });
        ok &= hit;
        parts.push(format!("{} → {}", f.name, class_name(&c)));
    }
    for spec in ["fullspace(x1, 0)", "fullspace(1, x1^2 - x2^2)"] {
        let c = classify_blowup_support(fx(spec)?.field.as_ref(), tol)?.class;
        ok &= c == SupportClass::Fullspace;
        parts.push(format!("{spec} → {}", class_name(&c)));
    }
    let c = classify_blowup_support(Fixture::quadrant().field.as_ref(), tol)?.class;
    ok &= matches!(c, SupportClass::Sector { theta0, .. } if (theta0 - FRAC_PI_2).abs() <= 0.02);
    parts.push(format!("quadrant → {}", class_name(&c)));
    Ok((ok, parts.join("; ")))
}

fn class_name(c: &SupportClass) -> String {
    match c {
        SupportClass::Empty => "empty".into(),
        SupportClass::Halfspace { .. } => "halfspace".into(),
        SupportClass::Fullspace => "fullspace".into(),
        SupportClass::Sector { theta0, .. } => format!("sector({theta0:.4})"),
        SupportClass::Other { reason } => format!("other({reason})"),
    }
}

fn nondegeneracy(profile: Profile, corrupt: bool) -> Outcome {
    let res = profile.pick(6, 12);
    let mut fixtures = vec![
        Fixture::quadrant(),
        fx("halfspace(0,1,0)")?,
        fx("halfspace(1,1,0)")?,
        fx("halfspace(2,1,1)")?,
        fx("fullspace(x1, 0)")?,
    ];
    if corrupt {
        let mut z = Fixture::quadrant();
        z.name = "zero".into();
        z.field = Arc::new(ConePoly::whole(QPoly::zero(2)));
        fixtures.push(z);
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for f in &fixtures {
        let rep = nondegeneracy_check(f.field.as_ref(), &f.domain, f.m, 0.5, res)?;
        ok &= rep.pass;
        parts.push(format!("{} floor {:.3e}/{:.3e}", f.name, rep.floor, rep.floor_refined));
    }
    Ok((ok, parts.join("; ")))
}

fn weak_flatness(corrupt: bool) -> Outcome {
    let hs = DomainShape::HalfSpace { normal: vec![0.0, 1.0] };
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [0.2, 0.1, 0.05] {
        let r = weak_flatness_check(&hs, &[0.0, 1.0], d, 12)?.r;
        ok &= r > 0.0;
        parts.push(format!("halfspace δ={d}: r={r}"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sec = DomainShape::Sector { theta0: FRAC_PI_2 };
    let r = weak_flatness_check(&sec, &[-s, s], 0.1, 12)?.r;
    ok &= if corrupt { r > 0.0 } else { r == 0.0 };
    parts.push(format!("sector(π/2) δ=0.1: r={r}"));
    Ok((ok, parts.join("; ")))
}

fn edge_reduction(corrupt: bool) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let injected = Fixture::wedge3d_injected(&rat(1, 10))?;
    let mut fixtures = vec![Fixture::wedge3d(), Fixture::halfspace3d()?];
    if corrupt {
        fixtures.push(injected.clone());
    }
    for f in &fixtures {
        let cone = f.cone.as_ref().ok_or(Error::ZeroField)?;
        let rep = edge_probe(cone, f.edge.as_deref().unwrap_or(&[]))?;
        ok &= rep.pass && rep.limit_max < 1e-10;
        parts.push(format!("{} max|e·∇w| = {:.1e}", f.name, rep.limit_max));
    }
    if !corrupt {
        let rep = edge_probe(injected.cone.as_ref().ok_or(Error::ZeroField)?, &[0.0, 0.0, 1.0])?;
        ok &= !rep.pass;
        parts.push(format!("injected control flagged with {:.3e}", rep.limit_max));
    }
    Ok((ok, parts.join("; ")))
}

/// Relative L² distance between two sample vectors.
fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn scatter_evidence(profile: Profile, corrupt: bool) -> Outcome {
    let mesh = profile.pick(32, 64);
    let mut parts = Vec::new();
    let mut ok = true;

    // disk against the separation-of-variables series
    let (k, h, radius) = (2.0, 1.0, 0.5);
    let disk = DomainShape::Disk {
        center: [0.0, 0.0],
        radius,
    };
    let angles = uniform_angles(64);
    let op = LsOperator::new(k, &Contrast::Constant(h), &disk, 2 * mesh)?;
    let ff = far_field_at(&op.solve(&Incident::Plane { angle: 0.3 })?, &angles);
    let series = disk_series_far_field(k, h, radius, 0.3, &angles)?;
    let disk_err = rel_l2(&ff.complex().collect::<Vec<_>>(), &series);
    ok &= disk_err < 1e-3;
    parts.push(format!("disk vs series {disk_err:.2e}"));

    // weak contrast against the Born integral at interior cell centres
    let hb = 1e-3;
    let inc = Incident::Plane { angle: 0.0 };
    let op = LsOperator::new(k, &Contrast::Constant(hb), &disk, 2 * mesh)?;
    let u = op.solve(&inc)?;
    let (mut got, mut born) = (Vec::new(), Vec::new());
    for i in u.support() {
        let c = u.centre(i);
        if c[0].hypot(c[1]) < radius - u.spacing {
            got.push(u.scattered(i));
            born.push(born_disk_scattered(k, hb, [0.0, 0.0], radius, &inc, c));
        }
    }
    let born_err = rel_l2(&got, &born);
    ok &= born_err < 0.01;
    parts.push(format!("Born {born_err:.2e}"));

    // reciprocity u^∞(x̂; d) = u^∞(−d; −x̂) on the square
    let square = DomainShape::square(1.0);
    let op = LsOperator::new(k, &Contrast::Constant(1.0), &square, mesh)?;
    let mut rng = random::seeded(0x5ca7);
    let mut recip = 0.0f64;
    for _ in 0..3 {
        let (xa, da) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let a = far_field_at(&op.solve(&Incident::Plane { angle: da })?, &[xa]);
        let b = far_field_at(&op.solve(&Incident::Plane { angle: xa + PI })?, &[da + PI]);
        let (za, zb) = (a.complex().next().unwrap_or_default(), b.complex().next().unwrap_or_default());
        recip = recip.max((za - zb).norm() / za.norm().max(zb.norm()));
    }
    ok &= recip < 1e-6;
    parts.push(format!("reciprocity {recip:.1e}"));

    // corner evidence on the unit square
    let contrast = if corrupt { Contrast::Constant(0.0) } else { Contrast::Constant(1.0) };
    let incidents = standard_incidents(&square, 16);
    let ks = [1.0, 2.0, 3.0, 4.0, 5.0];
    let rep = scattering_evidence(&square, &contrast, &ks, &incidents, mesh)?;
    ok &= rep.pass;
    parts.push(format!(
        "square floor {:.6e} (mesh {}) / {:.6e} (mesh {}) at k={} {}{}",
        rep.floor_coarse,
        rep.mesh,
        rep.floor_fine,
        rep.mesh_fine,
        rep.argmin.0,
        rep.argmin.1,
        if rep.vanishing_trend { ", VANISHING TREND" } else { "" }
    ));
    Ok((ok, parts.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids_are_rejected() {
        let mut o = VerifyOptions::new(Profile::Quick);
        o.inject = vec!["nope".into()];
        assert!(verify_all(&o).is_err());
    }

    #[test]
    fn cheap_checks_pass_and_their_controls_fail() {
        for id in ["halfspace-2d", "weak-flatness", "edge-reduction", "halfspace-poly"] {
            assert!(run_check(id, Profile::Quick, false).unwrap().pass, "{id}");
            assert!(!run_check(id, Profile::Quick, true).unwrap().pass, "{id} control");
        }
    }
}
