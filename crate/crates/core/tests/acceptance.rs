//! Acceptance suite: one PASS/FAIL line per criterion, each under a wall-clock budget.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::RngExt;

use freebound::blowup::{
    classify_blowup_support, decay_rate_check, dyadic_radii, edge_probe, fine_decay_check,
    homogeneity_degree, nondegeneracy_check, weak_flatness_check, Fixture, SupportClass,
};
use freebound::domain::DomainShape;
use freebound::field::{ConePoly, RadiallyModulated};
use freebound::halfspace::{halfspace_blowup_2d, harmonic_to_ab, rotate_2d, solve_halfspace_poly};
use freebound::poly::{parse_poly, random, rat, QPoly};
use freebound::scatter::{
    disk_series_far_field, far_field_at, scattering_evidence, standard_incidents, uniform_angles, Contrast,
    Incident, LsOperator,
};
use freebound::sector::{closed_form_roots_m1, sector_nonexistence_certificate};
use freebound::weiss::{monotonicity_scan, weiss_closed_form, weiss_w, WeissConfig};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q2(s: &str) -> QPoly {
    parse_poly(s, Some(2)).unwrap()
}

fn halfspace_cone(h: &QPoly) -> ConePoly {
    let n = h.dim();
    let sol = solve_halfspace_poly(h, n).unwrap();
    let mut e = vec![0.0; n];
    e[n - 1] = 1.0;
    ConePoly::new(sol.solution, vec![e]).unwrap()
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn halfspace_poly_solve() -> Verdict {
    let mut rng = random::seeded(0xacc1);
    let mut max_deg = 0;
    for i in 0..50 {
        let n = 2 + i % 3;
        let m = rng.random_range(0..=6u32);
        let f = random::homogeneous(&mut rng, n, m);
        let sol = solve_halfspace_poly(&f, n).map_err(|e| format!("case {i}: {e}"))?;
        let reference = common::halfspace_series(&f);
        ensure(sol.solution == reference, || format!("case {i} (n={n}, m={m}) differs from the series solution"))?;
        ensure(sol.verify().is_ok(), || format!("case {i} fails its own residual check"))?;
        max_deg = max_deg.max(m);
    }
    Ok(format!("50/50 random right-hand sides solved exactly, degrees up to {max_deg}"))
}

fn planar_blowup_matches() -> Verdict {
    let mut rng = random::seeded(0xacc2);
    for m in 0..=5u32 {
        let h = random::harmonic(&mut rng, 2, m);
        let (_, a, b) = harmonic_to_ab(&h).map_err(|e| e.to_string())?;
        let complex = halfspace_blowup_2d(m as i64, a, b).and_then(|s| s.into_real()).map_err(|e| e.to_string())?;
        ensure(complex.solution == common::halfspace_series(&h), || format!("m = {m}: complex form differs"))?;
    }
    let (_, a, b) = harmonic_to_ab(&QPoly::var(2, 0)).map_err(|e| e.to_string())?;
    let m1 = halfspace_blowup_2d(1, a, b).and_then(|s| s.into_real()).map_err(|e| e.to_string())?;
    ensure(m1.solution == q2("1/2 * x1 * x2^2"), || format!("H = x1 gives {}", m1.solution))?;
    Ok(format!("m = 0..5 coefficient-exact; H = x1 gives {}", m1.solution))
}

fn energy_closed_form() -> Verdict {
    let mut rng = random::seeded(0xacc3);
    let mut worst = 0.0f64;
    for m in 0..=5u32 {
        let h = random::harmonic(&mut rng, 2, m);
        let exact = weiss_closed_form(&h, 2).map_err(|e| e.to_string())?.value;
        let sol = solve_halfspace_poly(&h, 2).map_err(|e| e.to_string())?;
        let quad = common::weiss_polar_2d(&sol.solution, &h, m, 1.0);
        let lib = weiss_w(&halfspace_cone(&h), &h, &WeissConfig::new(m, 2, vec![1.0]), 1.0)
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max((quad - exact).abs() / exact.abs()).max((lib - exact).abs() / exact.abs());
    }
    for m in 0..=5u32 {
        let h = random::harmonic(&mut rng, 3, m);
        let exact = weiss_closed_form(&h, 3).map_err(|e| e.to_string())?.value;
        let sol = solve_halfspace_poly(&h, 3).map_err(|e| e.to_string())?;
        let quad = common::weiss_spherical_3d(&sol.solution, &h, m, 1.0);
        let lib = weiss_w(&halfspace_cone(&h), &h, &WeissConfig::new(m, 3, vec![1.0]), 1.0)
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max((quad - exact).abs() / exact.abs()).max((lib - exact).abs() / exact.abs());
    }
    ensure(worst < 1e-6, || format!("closed form vs quadrature {worst:.2e}"))?;

    let one = QPoly::one(2);
    let unit = weiss_closed_form(&one, 2).map_err(|e| e.to_string())?;
    ensure(unit.exact.coeff == rat(1, 16) && unit.exact.pi_power == 1, || "H = 1 is not π/16".into())?;
    let unit_quad = common::weiss_polar_2d(&solve_halfspace_poly(&one, 2).unwrap().solution, &one, 0, 1.0);
    ensure((unit_quad - PI / 16.0).abs() < 1e-10, || format!("H = 1 quadrature {unit_quad}"))?;

    let h = q2("2 * x1 + 6 * x2");
    let rotated = rotate_2d(&h, &rat(3, 5), &rat(4, 5)).map_err(|e| e.to_string())?;
    let (a, b) = (weiss_closed_form(&h, 2).unwrap(), weiss_closed_form(&rotated, 2).unwrap());
    ensure(a.exact == b.exact, || "rotation changed the closed form".into())?;
    let qa = common::weiss_polar_2d(&solve_halfspace_poly(&h, 2).unwrap().solution, &h, 1, 1.0);
    let qb = common::weiss_polar_2d(&solve_halfspace_poly(&rotated, 2).unwrap().solution, &rotated, 1, 1.0);
    ensure((qa - qb).abs() < 1e-10 * qa.abs(), || format!("rotated quadrature {qa} vs {qb}"))?;
    let c = qa / 40.0;
    ensure(a.exact.coeff.clone() / rat(40, 1) == rat(1, 96), || "c is not π/96 exactly".into())?;
    ensure((c - PI / 96.0).abs() < 1e-6 * PI / 96.0, || format!("c = {c}"))?;
    Ok(format!("max rel err {worst:.1e}; H=1 → π/16; rotation invariant; c = {c:.12} = π/96"))
}

fn weiss_constancy() -> Verdict {
    let mut spread = 0.0f64;
    for (h, m) in [("x1", 1u32), ("1", 0), ("x1^2 - x2^2", 2), ("x1^3 - 3 * x1 * x2^2", 3)] {
        let hp = q2(h);
        let cfg = WeissConfig::geometric(m, 2, 0.5f64.powi(8), 1.0, 17).map_err(|e| e.to_string())?;
        let rep = monotonicity_scan(&halfspace_cone(&hp), &hp, None, None, &cfg).map_err(|e| e.to_string())?;
        ensure(rep.w_spread < 1e-8, || format!("H = {h}: spread {:.2e}", rep.w_spread))?;
        let exact = weiss_closed_form(&hp, 2).unwrap().value;
        let sol = solve_halfspace_poly(&hp, 2).unwrap().solution;
        for r in [0.5f64.powi(8), 0.5f64.powi(4), 1.0] {
            let q = common::weiss_polar_2d(&sol, &hp, m, r);
            ensure((q - exact).abs() < 1e-8 * exact.abs().max(1.0), || format!("H = {h}: W({r}) = {q}"))?;
        }
        spread = spread.max(rep.w_spread);
    }
    let hp = q2("2 * x1 + 6 * x2");
    let u = RadiallyModulated::new(halfspace_cone(&hp), &hp, 1, 0.1);
    let rem = |x: &[f64]| u.remainder(x);
    let cfg = WeissConfig::geometric(1, 2, 1.0 / 16.0, 1.0, 9).map_err(|e| e.to_string())?;
    let rep = monotonicity_scan(&u, &hp, Some(&rem), None, &cfg).map_err(|e| e.to_string())?;
    let wf: Vec<f64> = rep.records.iter().map(|r| r.wf).collect();
    let monotone = wf.windows(2).all(|w| w[1] >= w[0] - 1e-10 * w[0].abs());
    let slope = rep.f_slope.unwrap_or(f64::NAN);
    ensure(rep.verdict && monotone, || format!("W + F not monotone: {wf:?}"))?;
    ensure(slope >= 0.9, || format!("F slope {slope}"))?;
    Ok(format!("W spread ≤ {spread:.1e} on [2^-8, 1]; perturbed W+F monotone, F slope {slope:.3}"))
}

fn sector_certificate() -> Verdict {
    let certs = sector_nonexistence_certificate(10, 0.05, 1_000_000).map_err(|e| e.to_string())?;
    let mut min = f64::INFINITY;
    for c in &certs {
        ensure(!c.roots_found.is_empty(), || format!("m = {}: no root at π", c.m))?;
        ensure(c.roots_found.iter().all(|t| (t - PI).abs() <= 1e-12), || {
            format!("m = {}: roots {:?}", c.m, c.roots_found)
        })?;
        ensure(c.min_abs_det > 0.0 && !c.contradiction, || format!("m = {}: minimum {}", c.m, c.min_abs_det))?;
        ensure(c.refinement_stable, || {
            format!("m = {}: minimum {} moved to {}", c.m, c.min_abs_det, c.min_abs_det_refined)
        })?;
        ensure((c.argmin_theta - PI).abs() >= 0.05 - 1e-12, || format!("m = {}: argmin inside the margin", c.m))?;
        min = min.min(c.min_abs_det);
    }
    let reference = common::m1_residual_roots(100_000);
    ensure(reference.len() == 1 && (reference[0] - PI).abs() < 1e-12, || format!("reference roots {reference:?}"))?;
    ensure(closed_form_roots_m1() == vec![PI], || "closed form m = 1 roots differ".into())?;
    Ok(format!("m = 1..10 on 10^6 points: roots only at π, min |det| = {min:.4e}, refinement stable"))
}

fn classifier() -> Verdict {
    let tol = 1e-6;
    for spec in ["halfspace(0,1,0)", "halfspace(1,1,0)", "halfspace(2,0,1)", "halfspace(4,1,-2)"] {
        let f = Fixture::parse(spec).map_err(|e| e.to_string())?;
        let c = classify_blowup_support(f.field.as_ref(), tol).map_err(|e| e.to_string())?.class;
        ensure(matches!(c, SupportClass::Halfspace { .. }), || format!("{spec} → {c:?}"))?;
    }
    for spec in ["fullspace(x1, 0)", "fullspace(1, x1^2 - x2^2)"] {
        let f = Fixture::parse(spec).map_err(|e| e.to_string())?;
        let c = classify_blowup_support(f.field.as_ref(), tol).map_err(|e| e.to_string())?.class;
        ensure(c == SupportClass::Fullspace, || format!("{spec} → {c:?}"))?;
    }
    let c = classify_blowup_support(Fixture::quadrant().field.as_ref(), tol).map_err(|e| e.to_string())?.class;
    let theta = match c {
        SupportClass::Sector { theta0, .. } => theta0,
        other => return Err(format!("quadrant → {other:?}")),
    };
    ensure((theta - FRAC_PI_2).abs() <= 0.02, || format!("quadrant opening {theta}"))?;
    Ok(format!("half-spaces and full spaces recognised; quadrant → sector {theta:.4}"))
}

fn decay_bounds() -> Verdict {
    let q = Fixture::quadrant();
    let fit = homogeneity_degree(q.field.as_ref(), &dyadic_radii(q.field.as_ref(), 1, 12)).map_err(|e| e.to_string())?;
    ensure((fit.degree - 4.0).abs() <= 0.02, || format!("quadrant degree {}", fit.degree))?;
    for f in [Fixture::quadrant(), Fixture::parse("halfspace(1,1,0)").unwrap()] {
        let rep = decay_rate_check(f.field.as_ref(), f.m, &dyadic_radii(f.field.as_ref(), 2, 16)).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("{}: decay bounds fail", f.name))?;
        let fine = fine_decay_check(f.field.as_ref(), &f.domain, f.m).map_err(|e| e.to_string())?;
        ensure(fine.pass, || format!("{}: fine bounds fail", f.name))?;
    }
    let log = Fixture::log_counterexample(1.0).map_err(|e| e.to_string())?;
    let rep = decay_rate_check(log.field.as_ref(), 0, &dyadic_radii(log.field.as_ref(), 2, 20)).map_err(|e| e.to_string())?;
    ensure(!rep.hessian.pass, || "log counterexample passes the Hessian bound".into())?;
    ensure(rep.laplacian.pass && rep.laplacian.constant <= 4.0 + 1e-6, || {
        format!("log counterexample Laplacian constant {}", rep.laplacian.constant)
    })?;
    let mut rng = random::seeded(0xacc7);
    for _ in 0..200 {
        let r = 10f64.powf(rng.random_range(-6.0..-0.5));
        let t = rng.random_range(0.0..2.0 * PI);
        let x = [r * t.cos(), r * t.sin()];
        let (got, want) = (log.field.laplacian(&x), common::log_counterexample_laplacian(&x));
        ensure((got - want).abs() < 1e-6, || format!("Laplacian at {x:?}: {got} vs {want}"))?;
    }
    Ok(format!(
        "quadrant degree {:.4}; log counterexample Hessian growth {:.3}/log, |Δu| ≤ {:.3}",
        fit.degree, rep.hessian.log_growth, rep.laplacian.constant
    ))
}

fn nondegeneracy_and_flatness() -> Verdict {
    let mut floor = f64::INFINITY;
    for f in [
        Fixture::quadrant(),
        Fixture::parse("halfspace(0,1,0)").unwrap(),
        Fixture::parse("halfspace(2,1,1)").unwrap(),
        Fixture::parse("fullspace(x1, 0)").unwrap(),
    ] {
        let rep = nondegeneracy_check(f.field.as_ref(), &f.domain, f.m, 0.5, 12).map_err(|e| e.to_string())?;
        ensure(rep.pass && rep.floor > 0.0, || format!("{}: floor {}", f.name, rep.floor))?;
        let drift = (rep.floor - rep.floor_refined).abs() / rep.floor;
        ensure(drift <= 0.1, || format!("{}: floor moved by {drift:.2}", f.name))?;
        floor = floor.min(rep.floor);
    }
    let hs = DomainShape::HalfSpace { normal: vec![0.0, 1.0] };
    for d in [0.2, 0.1, 0.05] {
        let r = weak_flatness_check(&hs, &[0.0, 1.0], d, 12).map_err(|e| e.to_string())?.r;
        ensure(r > 0.0, || format!("half-space at δ = {d}: r = {r}"))?;
    }
    let sec = DomainShape::Sector { theta0: FRAC_PI_2 };
    let r = weak_flatness_check(&sec, &[-FRAC_1_SQRT_2, FRAC_1_SQRT_2], 0.1, 12).map_err(|e| e.to_string())?.r;
    ensure(r == 0.0, || format!("quarter sector at δ = 0.1: r = {r}"))?;
    Ok(format!("nondegeneracy floor ≥ {floor:.3e}; half-space flat at δ ∈ {{0.2, 0.1, 0.05}}; sector π/2 not flat"))
}

fn edge_reduction() -> Verdict {
    let mut worst = 0.0f64;
    for f in [Fixture::wedge3d(), Fixture::halfspace3d().unwrap()] {
        let rep = edge_probe(f.cone.as_ref().unwrap(), f.edge.as_ref().unwrap()).map_err(|e| e.to_string())?;
        ensure(rep.pass && rep.limit_max < 1e-10, || format!("{}: max |e·∇w| = {}", f.name, rep.limit_max))?;
        worst = worst.max(rep.limit_max);
    }
    let inj = Fixture::wedge3d_injected(&rat(1, 10)).map_err(|e| e.to_string())?;
    let rep = edge_probe(inj.cone.as_ref().unwrap(), inj.edge.as_ref().unwrap()).map_err(|e| e.to_string())?;
    ensure(!rep.pass, || "injected x3 dependence not flagged".into())?;
    Ok(format!("max |e·∇w| = {worst:.1e}; injected control flagged at {:.3e}", rep.limit_max))
}

fn scattering() -> Verdict {
    let (k, radius) = (2.0, 0.5);
    let disk = DomainShape::Disk { center: [0.0, 0.0], radius };
    let angles = uniform_angles(64);
    let reference: Vec<Complex64> = angles.iter().map(|&t| common::disk_far_field_series(k, 1.0, radius, 0.3, t)).collect();
    let lib_series = disk_series_far_field(k, 1.0, radius, 0.3, &angles).map_err(|e| e.to_string())?;
    let series_gap = rel_l2(&lib_series, &reference);
    ensure(series_gap < 1e-10, || format!("library series vs reference {series_gap:.2e}"))?;
    let op = LsOperator::new(k, &Contrast::Constant(1.0), &disk, 64).map_err(|e| e.to_string())?;
    let u = op.solve(&Incident::Plane { angle: 0.3 }).map_err(|e| e.to_string())?;
    let disk_err = rel_l2(&far_field_at(&u, &angles).complex().collect::<Vec<_>>(), &reference);
    ensure(disk_err < 1e-3, || format!("disk vs series {disk_err:.2e}"))?;

    let hb = 1e-3;
    let op = LsOperator::new(k, &Contrast::Constant(hb), &disk, 64).map_err(|e| e.to_string())?;
    let u = op.solve(&Incident::Plane { angle: 0.0 }).map_err(|e| e.to_string())?;
    let born: Vec<Complex64> = angles.iter().map(|&t| common::born_disk_far_field(k, hb, radius, 0.0, t)).collect();
    let born_err = rel_l2(&far_field_at(&u, &angles).complex().collect::<Vec<_>>(), &born);
    ensure(born_err < 0.01, || format!("Born {born_err:.2e}"))?;

    let square = DomainShape::square(1.0);
    let op = LsOperator::new(k, &Contrast::Constant(1.0), &square, 32).map_err(|e| e.to_string())?;
    let mut rng = random::seeded(0xacca);
    let mut recip = 0.0f64;
    for _ in 0..4 {
        let (xa, da) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let a = far_field_at(&op.solve(&Incident::Plane { angle: da }).unwrap(), &[xa]).complex().next().unwrap();
        let b = far_field_at(&op.solve(&Incident::Plane { angle: xa + PI }).unwrap(), &[da + PI])
            .complex()
            .next()
            .unwrap();
        recip = recip.max((a - b).norm() / a.norm().max(b.norm()));
    }
    ensure(recip < 1e-6, || format!("reciprocity {recip:.2e}"))?;

    let incidents = standard_incidents(&square, 16);
    ensure(incidents.len() == 16, || format!("{} incidents", incidents.len()))?;
    let corner_null = incidents.iter().any(|inc| {
        matches!(inc, Incident::PointNull { .. })
            && square.corners().iter().any(|c| (1..=5).all(|kk| inc.eval(kk as f64, c).norm() < 1e-12))
    });
    ensure(corner_null, || "no incident vanishes at a corner".into())?;
    let ks = [1.0, 2.0, 3.0, 4.0, 5.0];
    let rep = scattering_evidence(&square, &Contrast::Constant(1.0), &ks, &incidents, 32).map_err(|e| e.to_string())?;
    ensure(rep.floor_coarse > 0.0 && rep.floor_fine > 0.0, || "vanishing far field".into())?;
    ensure(rep.stable && !rep.vanishing_trend && rep.pass, || {
        format!("floor {:.4e} → {:.4e} not stable", rep.floor_coarse, rep.floor_fine)
    })?;
    Ok(format!(
        "disk {disk_err:.1e}, Born {born_err:.1e}, reciprocity {recip:.1e}; square floor {:.5e} (mesh {}) / {:.5e} (mesh {})",
        rep.floor_coarse, rep.mesh, rep.floor_fine, rep.mesh_fine
    ))
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: "A1", title: "half-space polynomial solve", budget: Duration::from_secs(10), run: halfspace_poly_solve },
        Criterion { id: "A2", title: "planar blowup vs polynomial solve", budget: Duration::from_secs(5), run: planar_blowup_matches },
        Criterion { id: "A3", title: "energy closed form", budget: Duration::from_secs(60), run: energy_closed_form },
        Criterion { id: "A4", title: "Weiss constancy and monotonicity", budget: Duration::from_secs(120), run: weiss_constancy },
        Criterion { id: "A5", title: "sector nonexistence certificate", budget: Duration::from_secs(60), run: sector_certificate },
        Criterion { id: "A6", title: "blowup support classifier", budget: Duration::from_secs(30), run: classifier },
        Criterion { id: "A7", title: "decay rates", budget: Duration::from_secs(30), run: decay_bounds },
        Criterion { id: "A8", title: "nondegeneracy and weak flatness", budget: Duration::from_secs(30), run: nondegeneracy_and_flatness },
        Criterion { id: "A9", title: "edge reduction", budget: Duration::from_secs(10), run: edge_reduction },
        Criterion { id: "A10", title: "corner scattering", budget: Duration::from_secs(600), run: scattering },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.id == f || c.title.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > c.budget => Err(format!("{d} (over budget)")),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!(
            "{tag} {:<4} {:<36} {:>7.2}s/{:>3}s  {detail}",
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
