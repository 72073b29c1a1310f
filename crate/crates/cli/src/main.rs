use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use freebound::blowup::{
    classify_blowup_support, decay_rate_check, dyadic_radii, edge_probe, edge_probe_sampled, fine_decay_check,
    homogeneity_degree, nondegeneracy_check, rescale, weak_flatness_check, Fixture,
};
use freebound::domain::DomainShape;
use freebound::field::{ConePoly, FieldRef, RadiallyModulated};
use freebound::halfspace::solve_halfspace_poly;
use freebound::poly::parse_poly;
use freebound::sampled::{GridSpec, SampledField};
use freebound::scatter::{far_field, named_shape, Contrast, Incident, ScatterProblem, LsOperator};
use freebound::sector::sector_nonexistence_certificate;
use freebound::verify::{verify_all, Profile, VerifyOptions, CHECK_IDS};
use freebound::weiss::{monotonicity_scan, WeissConfig};

/// Environment variable naming the directory that relative output paths are resolved against.
const OUT_ROOT_VAR: &str = "FREEBOUND_OUT_DIR";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] freebound::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        use freebound::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidArgument(_) | E::Parse { .. } | E::DimensionMismatch { .. }) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug, Serialize)]
#[command(name = "freebound", version, about = "Free-boundary and corner-scattering verification toolkit")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat `key = value` file; its entries are applied after the command line.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Exact polynomial solution vanishing to second order on {x_n = 0}.
    Halfspace(HalfspaceArgs),
    /// Weiss energy W, correction F and the monotonicity verdict over a radius grid.
    Weiss(WeissArgs),
    /// Determinant scan certifying that no sector solution exists away from the half-plane.
    SectorScan(SectorArgs),
    /// Blowup diagnostics on a fixture or sampled field.
    Blowup(BlowupArgs),
    /// Lippmann–Schwinger solve and far field for a penetrable obstacle.
    Scatter(ScatterArgs),
    /// Runs every check and prints one PASS/FAIL line per check id.
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct HalfspaceArgs {
    /// Homogeneous right-hand side, e.g. "x1^2 - 3 * x2 x3".
    #[arg(long)]
    rhs: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "halfspace.json")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct WeissArgs {
    /// `halfspace`, `perturbed:C` (radially modulated half-space solution) or a fixture name.
    #[arg(long, default_value = "halfspace")]
    field: String,
    #[arg(long = "H")]
    h: String,
    /// Degree of H when omitted.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0 / 256.0)]
    rmin: f64,
    #[arg(long, default_value_t = 1.0)]
    rmax: f64,
    #[arg(long, default_value_t = 9)]
    steps: usize,
    #[arg(long, default_value = "report.json")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SectorArgs {
    #[arg(long, default_value_t = 10)]
    m_max: u32,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    steps: usize,
    #[arg(long, default_value = "cert.json")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum BlowupOp {
    Rescale,
    Degree,
    Decay,
    Nondeg,
    Flatness,
    Classify,
    Edge,
}

#[derive(Args, Debug, Serialize)]
struct BlowupArgs {
    /// quadrant, halfspace(m,a,b), fullspace(H,w), log-counterexample(α), wedge3d, halfspace3d,
    /// wedge3d-injected(ε).
    #[arg(long, conflicts_with = "field", required_unless_present = "field")]
    fixture: Option<String>,
    /// Sampled field in the grid CSV format.
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, value_enum)]
    op: BlowupOp,
    /// Support of a sampled field: halfspace, quadrant, whole or sector:ANGLE.
    #[arg(long)]
    domain: Option<String>,
    /// Rescaling radius.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    /// Rescaling exponent; m + 2 when omitted.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 8)]
    resolution: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Comma-separated flatness normal or edge direction.
    #[arg(long)]
    direction: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ScatterArgs {
    #[arg(long, value_parser = ["square", "disk", "sector"])]
    shape: String,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// `plane:ANGLE` or `herglotz:FILE` with `angle,re,im` rows.
    #[arg(long)]
    incident: String,
    #[arg(long, default_value_t = 64)]
    mesh: usize,
    #[arg(long, default_value_t = 256)]
    angles: usize,
    #[arg(long, default_value = "farfield.csv")]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "full")]
    quick: bool,
    #[arg(long)]
    full: bool,
    /// Run this check on its corrupted fixture (repeatable).
    #[arg(long, value_name = "CHECK")]
    inject: Vec<String>,
    /// Run only these checks (repeatable).
    #[arg(long, value_name = "CHECK")]
    only: Vec<String>,
    #[arg(long, default_value = "verify.json")]
    #[serde(skip)]
    out: PathBuf,
}

/// `key = value` lines turned into trailing `--key value` arguments.
fn config_args(path: &Path) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!("{}:{}: invalid key '{key}'", path.display(), i + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => {
                out.push(format!("--{key}"));
                out.push(value.to_string());
            }
        }
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<PathBuf> {
    argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--config=").map(PathBuf::from)
        }
    })
}

struct Run {
    root: PathBuf,
    hash: String,
    config: Value,
}

impl Run {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    /// Writes `contents` and its manifest `<file>.manifest.json`.
    fn emit(&self, out: &Path, contents: &str) -> CliResult<PathBuf> {
        let path = self.path(out);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, contents)?;
        let manifest = json!({
            "tool": "freebound",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "config_hash": self.hash,
            "output": path.file_name().map(|s| s.to_string_lossy().into_owned()),
        });
        let mut name = path.clone().into_os_string();
        name.push(".manifest.json");
        std::fs::write(PathBuf::from(name), pretty(&manifest))?;
        Ok(path)
    }

    fn emit_json(&self, out: &Path, mut value: Value) -> CliResult<PathBuf> {
        if let Value::Object(map) = &mut value {
            map.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        self.emit(out, &pretty(&value))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_vector(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad vector component '{t}'"))))
        .collect()
}

fn parse_domain(s: &str, n: usize) -> CliResult<DomainShape> {
    let mut normal = vec![0.0; n];
    normal[n - 1] = 1.0;
    match s {
        "halfspace" => Ok(DomainShape::HalfSpace { normal }),
        "quadrant" => Ok(DomainShape::Quadrant),
        "whole" => Ok(DomainShape::Whole { n }),
        _ => match s.strip_prefix("sector:") {
            Some(a) => {
                let theta0 = a.parse().map_err(|_| CliError::Usage(format!("bad sector angle '{a}'")))?;
                Ok(DomainShape::Sector { theta0 })
            }
            None => Err(CliError::Usage(format!("unknown domain '{s}'"))),
        },
    }
}

fn cmd_halfspace(run: &Run, a: &HalfspaceArgs) -> CliResult<u8> {
    let f = parse_poly(&a.rhs, Some(a.dim))?;
    let sol = solve_halfspace_poly(&f, a.dim)?;
    let verified = sol.verify().is_ok();
    println!("{}", sol.solution);
    run.emit_json(
        &a.out,
        json!({
            "dim": a.dim,
            "m": sol.m,
            "rhs": sol.rhs.to_string(),
            "solution": sol.solution.to_string(),
            "normal": sol.normal,
            "verified": verified,
        }),
    )?;
    Ok(if verified { 0 } else { 1 })
}

fn cmd_weiss(run: &Run, a: &WeissArgs) -> CliResult<u8> {
    let h = parse_poly(&a.h, Some(a.dim))?;
    let m = a.m.unwrap_or_else(|| h.degree().unwrap_or(0));
    let cfg = WeissConfig::geometric(m, a.dim, a.rmin, a.rmax, a.steps)?;
    let halfspace = || -> CliResult<ConePoly> {
        let sol = solve_halfspace_poly(&h, a.dim)?;
        Ok(ConePoly::new(sol.solution, vec![sol.normal.clone()])?)
    };
    let report = if a.field == "halfspace" {
        monotonicity_scan(&halfspace()?, &h, None, None, &cfg)?
    } else if let Some(c) = a.field.strip_prefix("perturbed:") {
        let c: f64 = c.parse().map_err(|_| CliError::Usage(format!("bad perturbation '{c}'")))?;
        let u = RadiallyModulated::new(halfspace()?, &h, m, c);
        let rem = |x: &[f64]| u.remainder(x);
        monotonicity_scan(&u, &h, Some(&rem), None, &cfg)?
    } else {
        let f = Fixture::parse(&a.field)?;
        monotonicity_scan(f.field.as_ref(), &h, None, None, &cfg)?
    };
    println!(
        "verdict {} limit {:.17e} max violation {:.3e}",
        if report.verdict { "monotone" } else { "NOT MONOTONE" },
        report.limit,
        report.max_violation
    );
    run.emit_json(&a.out, to_value(&report))?;
    Ok(if report.verdict { 0 } else { 1 })
}

fn cmd_sector(run: &Run, a: &SectorArgs) -> CliResult<u8> {
    let certs = sector_nonexistence_certificate(a.m_max, a.delta, a.steps)?;
    let mut ok = true;
    for c in &certs {
        ok &= !c.contradiction && c.refinement_stable;
        println!(
            "m={:2} min|det|={:.6e} at θ={:.6} roots {:?}",
            c.m, c.min_abs_det, c.argmin_theta, c.roots_found
        );
    }
    run.emit_json(&a.out, json!({ "certificates": to_value(&certs), "pass": ok }))?;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_blowup(run: &Run, a: &BlowupArgs) -> CliResult<u8> {
    let (field, fixture, grid_m): (FieldRef, Option<Fixture>, Option<u32>) = match (&a.fixture, &a.field) {
        (Some(spec), _) => {
            let f = Fixture::parse(spec)?;
            (f.field.clone(), Some(f), None)
        }
        (None, Some(path)) => {
            let file = std::fs::File::open(path)?;
            let s = SampledField::read_csv(std::io::BufReader::new(file))?;
            let m = s.grid.m;
            (std::sync::Arc::new(s), None, Some(m))
        }
        (None, None) => return Err(CliError::Usage("need --fixture or --field".into())),
    };
    let n = field.dim();
    let m = a.m.or(fixture.as_ref().map(|f| f.m)).or(grid_m).unwrap_or(0);
    let domain = match (&a.domain, &fixture) {
        (Some(d), _) => parse_domain(d, n)?,
        (None, Some(f)) => f.domain.clone(),
        (None, None) => DomainShape::Whole { n },
    };
    let default_out = format!("blowup-{}.json", to_value(&a.op).as_str().unwrap_or("op"));
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(default_out));
    let (value, pass) = match a.op {
        BlowupOp::Rescale => {
            let k = a.k.unwrap_or(m as f64 + 2.0);
            let r = rescale(field.clone(), a.r, k)?;
            let grid = GridSpec::new(n, if n == 2 { 1.0 / 64.0 } else { 1.0 / 16.0 }, 1.0, m)?;
            let s = SampledField::sample(std::sync::Arc::new(r), grid)?.detached();
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            let text = String::from_utf8(buf).map_err(|e| CliError::Usage(e.to_string()))?;
            let csv_out = if out.extension().is_some_and(|e| e == "json") { out.with_extension("csv") } else { out };
            let p = run.emit(&csv_out, &format!("# config_hash={}\n{text}", run.hash))?;
            println!("rescaled field written to {}", p.display());
            return Ok(0);
        }
        BlowupOp::Degree => {
            let fit = homogeneity_degree(field.as_ref(), &dyadic_radii(field.as_ref(), 1, 12))?;
            println!("degree {:.6} near integer {:?}", fit.degree, fit.near_integer);
            (to_value(&fit), true)
        }
        BlowupOp::Decay => {
            let rep = decay_rate_check(field.as_ref(), m, &dyadic_radii(field.as_ref(), 2, 16))?;
            let fine = match domain {
                DomainShape::Whole { .. } => None,
                ref d => Some(fine_decay_check(field.as_ref(), d, m)?),
            };
            let pass = rep.pass && fine.as_ref().is_none_or(|f| f.pass);
            println!(
                "value {} gradient {} hessian {} fine {}",
                rep.value.pass,
                rep.gradient.pass,
                rep.hessian.pass,
                fine.as_ref().map_or("n/a".into(), |f| f.pass.to_string())
            );
            (json!({ "decay": to_value(&rep), "fine": to_value(&fine), "pass": pass }), pass)
        }
        BlowupOp::Nondeg => {
            let rep = nondegeneracy_check(field.as_ref(), &domain, m, a.eps, a.resolution)?;
            println!("floor {:.6e} refined {:.6e} pass {}", rep.floor, rep.floor_refined, rep.pass);
            let pass = rep.pass;
            (to_value(&rep), pass)
        }
        BlowupOp::Flatness => {
            let e = match &a.direction {
                Some(d) => parse_vector(d)?,
                None => {
                    let mut e = vec![0.0; n];
                    e[n - 1] = 1.0;
                    e
                }
            };
            let rep = weak_flatness_check(&domain, &e, a.delta, 12)?;
            println!("flat down from r = {}", rep.r);
            (to_value(&rep), true)
        }
        BlowupOp::Classify => {
            let rep = classify_blowup_support(field.as_ref(), a.tol)?;
            println!("{}", serde_json::to_string(&rep.class).expect("serializable"));
            (to_value(&rep), true)
        }
        BlowupOp::Edge => {
            let e = match (&a.direction, fixture.as_ref().and_then(|f| f.edge.clone())) {
                (Some(d), _) => parse_vector(d)?,
                (None, Some(e)) => e,
                (None, None) => return Err(CliError::Usage("--direction is required for the edge probe".into())),
            };
            let rep = match fixture.as_ref().and_then(|f| f.cone.as_ref()) {
                Some(cone) => edge_probe(cone, &e)?,
                None => edge_probe_sampled(field.as_ref(), &e, m + 2, a.tol)?,
            };
            println!("max |e·∇w| = {:.3e} pass {}", rep.limit_max, rep.pass);
            let pass = rep.pass;
            (to_value(&rep), pass)
        }
    };
    run.emit_json(&out, json!({ "op": to_value(&a.op), "m": m, "result": value, "pass": pass }))?;
    Ok(if pass { 0 } else { 1 })
}

fn cmd_scatter(run: &Run, a: &ScatterArgs) -> CliResult<u8> {
    let shape = named_shape(&a.shape)?;
    let incident = Incident::parse(&a.incident)?;
    let p = ScatterProblem::new(a.k, Contrast::Constant(a.h), shape, incident)?;
    let op = LsOperator::for_problem(&p, a.mesh)?;
    let u = op.solve(&p.incident)?;
    let ff = far_field(&u, a.angles);
    let path = run.emit(&a.out, &format!("# config_hash={}\n# normalization: {}\n{}", run.hash, ff.normalization, ff.to_csv()))?;
    println!(
        "{} unknowns, {} iterations, residual {:.2e}, ‖u∞‖ = {:.17e} → {}",
        op.unknowns(),
        u.iterations,
        u.residual,
        ff.l2_norm(),
        path.display()
    );
    Ok(0)
}

fn cmd_verify(run: &Run, a: &VerifyArgs) -> CliResult<u8> {
    let profile = if a.full { Profile::Full } else { Profile::Quick };
    for id in a.inject.iter().chain(&a.only) {
        if !CHECK_IDS.contains(&id.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown check '{id}'; known checks: {}",
                CHECK_IDS.join(", ")
            )));
        }
    }
    let opts = VerifyOptions {
        profile,
        inject: a.inject.clone(),
        only: a.only.clone(),
    };
    let summary = verify_all(&opts)?;
    for r in &summary.results {
        println!("{} {:<22} {}", if r.pass { "PASS" } else { "FAIL" }, r.id, r.detail);
    }
    // timings would break byte-identical reports
    let mut value = to_value(&summary);
    if let Some(rs) = value.get_mut("results").and_then(Value::as_array_mut) {
        rs.iter_mut().filter_map(Value::as_object_mut).for_each(|o| {
            o.remove("seconds");
        });
    }
    run.emit_json(&a.out, value)?;
    Ok(if summary.pass { 0 } else { 1 })
}

fn real_main() -> CliResult<u8> {
    let mut argv: Vec<String> = std::env::args().collect();
    if let Some(path) = config_path(&argv) {
        argv.extend(config_args(&path)?);
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let config = to_value(&cli);
    let hash = Sha256::digest(serde_json::to_vec(&config).expect("serializable"))
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let root = std::env::var_os(OUT_ROOT_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from);
    let run = Run { root, hash, config };
    match &cli.command {
        Command::Halfspace(a) => cmd_halfspace(&run, a),
        Command::Weiss(a) => cmd_weiss(&run, a),
        Command::SectorScan(a) => cmd_sector(&run, a),
        Command::Blowup(a) => cmd_blowup(&run, a),
        Command::Scatter(a) => cmd_scatter(&run, a),
        Command::VerifyAll(a) => cmd_verify(&run, a),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.code();
            eprintln!("{} {e}", if code == 2 { "error:" } else { "FAIL" });
            ExitCode::from(code)
        }
    }
}
