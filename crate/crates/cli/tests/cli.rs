use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("freebound-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freebound"))
        .args(args)
        .env("FREEBOUND_OUT_DIR", root)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let d = scratch("usage");
    assert_eq!(code(&run(&d, &["bogus"])), 2);
    assert_eq!(code(&run(&d, &["halfspace", "--rhs", "x1", "--nope"])), 2);
    assert_eq!(code(&run(&d, &["halfspace", "--rhs", "x1 +", "--dim", "2"])), 2);
    assert_eq!(code(&run(&d, &["verify-all", "--quick", "--only", "no-such-check"])), 2);
    assert_eq!(code(&run(&d, &["--help"])), 0);
}

#[test]
fn halfspace_prints_exact_solution() {
    let d = scratch("halfspace");
    let o = run(&d, &["halfspace", "--rhs", "x1", "--dim", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1/2 * x1 x2^2");
    let v = json(d.join("halfspace.json"));
    assert_eq!(v["solution"], "1/2 * x1 x2^2");
    assert_eq!(v["verified"], true);
}

#[test]
fn weiss_report_has_records() {
    let d = scratch("weiss");
    let o = run(&d, &["weiss", "--H", "1", "--steps", "5", "--out", "w.json"]);
    assert_eq!(code(&o), 0);
    let v = json(d.join("w.json"));
    assert_eq!(v["verdict"], true);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 5);
    for r in recs {
        for key in ["r", "W", "F", "WF"] {
            assert!(r[key].is_number(), "{key}");
        }
        let w = r["W"].as_f64().unwrap();
        assert!((w - std::f64::consts::PI / 16.0).abs() < 1e-10);
    }
}

#[test]
fn sector_scan_certificate() {
    let d = scratch("sector");
    let o = run(&d, &["sector-scan", "--m-max", "3", "--steps", "20000"]);
    assert_eq!(code(&o), 0);
    let v = json(d.join("cert.json"));
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    for c in certs {
        assert!(c["min_abs_det"].as_f64().unwrap() > 0.0);
        assert!(c["argmin_theta"].is_number());
        let roots = c["roots_found"].as_array().unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
    }
}

#[test]
fn scatter_output_is_deterministic_and_hashed() {
    let a = scratch("scatter-a");
    let b = scratch("scatter-b");
    let args = ["scatter", "--shape", "square", "--k", "2", "--h", "1", "--incident", "plane:0.3", "--mesh", "16"];
    assert_eq!(code(&run(&a, &args)), 0);
    assert_eq!(code(&run(&b, &args)), 0);
    let ta = std::fs::read_to_string(a.join("farfield.csv")).unwrap();
    let tb = std::fs::read_to_string(b.join("farfield.csv")).unwrap();
    assert_eq!(ta, tb);
    let manifest = json(a.join("farfield.csv.manifest.json"));
    let hash = manifest["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(ta.lines().next().unwrap(), format!("# config_hash={hash}"));
    let rows: Vec<&str> = ta.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "angle,re,im");
    assert_eq!(rows.len(), 257);
    let re = rows[1].split(',').nth(1).unwrap();
    let mantissa = re.trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
}

#[test]
fn herglotz_incident_from_file() {
    let d = scratch("herglotz");
    std::fs::write(d.join("g.csv"), "angle,re,im\n0,1,0\n3.141592653589793,0,1\n").unwrap();
    let inc = format!("herglotz:{}", d.join("g.csv").display());
    let o = run(&d, &["scatter", "--shape", "disk", "--k", "1", "--incident", &inc, "--mesh", "16"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&run(&d, &["scatter", "--shape", "disk", "--k", "1", "--incident", "herglotz:/nonexistent"])), 1);
}

#[test]
fn config_file_overrides_flags() {
    let d = scratch("config");
    let cfg = d.join("run.cfg");
    std::fs::write(&cfg, "# scatter settings\nmesh = 16\nangles = 8\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = run(
        &d,
        &["scatter", "--shape", "disk", "--k", "1", "--incident", "plane:0", "--mesh", "64", "--config", cfg],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(d.join("farfield.csv.manifest.json"));
    assert_eq!(m["config"]["command"]["mesh"], 16);
    assert_eq!(m["config"]["command"]["angles"], 8);

    std::fs::write(d.join("bad.cfg"), "no_such_key = 3\n").unwrap();
    let bad = d.join("bad.cfg");
    let o = run(&d, &["scatter", "--shape", "disk", "--k", "1", "--incident", "plane:0", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn blowup_ops_on_fixtures() {
    let d = scratch("blowup");
    let o = run(&d, &["blowup", "--fixture", "quadrant", "--op", "classify"]);
    assert_eq!(code(&o), 0);
    let v = json(d.join("blowup-classify.json"));
    let theta = v["result"]["class"]["theta0"].as_f64().unwrap();
    assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 0.02);

    assert_eq!(code(&run(&d, &["blowup", "--fixture", "wedge3d", "--op", "edge"])), 0);
    assert_eq!(code(&run(&d, &["blowup", "--fixture", "wedge3d-injected(1/10)", "--op", "edge"])), 1);
    assert_eq!(code(&run(&d, &["blowup", "--fixture", "log-counterexample(1)", "--op", "decay"])), 1);
}

#[test]
fn sampled_field_round_trip_and_corruption() {
    let d = scratch("sampled");
    let o = run(&d, &["blowup", "--fixture", "quadrant", "--op", "rescale", "--r", "0.5", "--out", "q.csv"]);
    assert_eq!(code(&o), 0);
    let q = d.join("q.csv");
    let o = run(&d, &["blowup", "--field", q.to_str().unwrap(), "--op", "degree"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(d.join("blowup-degree.json"));
    assert!((v["result"]["degree"].as_f64().unwrap() - 4.0).abs() < 0.02);

    let text = std::fs::read_to_string(&q).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let n = lines.len();
    lines[n / 2] = "0.1,not-a-number,3";
    let bad = d.join("bad.csv");
    std::fs::write(&bad, lines.join("\n")).unwrap();
    let o = run(&d, &["blowup", "--field", bad.to_str().unwrap(), "--op", "degree"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("FAIL"));
}

#[test]
fn verify_all_reports_each_check() {
    let d = scratch("verify");
    let o = run(&d, &["verify-all", "--quick", "--only", "halfspace-2d", "--only", "edge-reduction"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("PASS halfspace-2d")));
    assert!(out.lines().any(|l| l.starts_with("PASS edge-reduction")));

    let o = run(&d, &["verify-all", "--quick", "--only", "edge-reduction", "--inject", "edge-reduction"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("FAIL edge-reduction"));
}
