use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tempfile::TempDir;
use tribes_cli::{exit, run};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn tribes(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tribes").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn analyze_reports_summary() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.json", &json!({"bounds": ["1", "1", "1", "1"]}));
    let o = tribes(&["analyze", "--input", p(&input)]);
    assert_eq!(o.code, exit::SUCCESS);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["talagrand_sum"], 4.0);
    assert!((v["alpha"].as_f64().unwrap() - 2.613706).abs() < 1e-5);
    assert!((v["mu_max"].as_f64().unwrap() - 0.2787094).abs() < 1e-6);
    assert_eq!(v["feasible"], true);

    let input = write(&dir, "half.json", &json!({"bounds": ["0.5"]}));
    let v: Value = serde_json::from_str(&tribes(&["analyze", "--input", p(&input)]).stdout).unwrap();
    assert_eq!(v["feasible"], false);
    assert_eq!(v["mu_max"], 0.0);

    let input = write(&dir, "zero.json", &json!({"bounds": ["0"]}));
    let o = tribes(&["analyze", "--input", p(&input)]);
    assert_eq!(o.code, exit::INPUT_ERROR);
    assert!(o.stderr.contains("outside (0, 1]"));
}

#[test]
fn construct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &json!({"bounds": ["1", "1", "1", "1"]}));
    let o = tribes(&["construct", "--input", p(&a), "--mu", "0.25", "--verify", "exact"]);
    assert_eq!(o.code, exit::SUCCESS, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["tribe_sizes"], json!([2, 2]));
    assert_eq!(v["m_star"], 1);
    assert_eq!(v["expectation"], json!({"mantissa": "1", "exponent": 2, "approx": 0.25}));
    assert_eq!(v["verification"]["mode"], "exhaustive");
    assert_eq!(v["verification"]["passed"], true);

    let b = write(
        &dir,
        "b.json",
        &json!({"bounds": ["1", "0.4", "0.3", "0.2", "0.1"], "mu": "0.1"}),
    );
    let o = tribes(&["construct", "--input", p(&b)]);
    assert_eq!(o.code, exit::UNGUARANTEED);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["guaranteed"], false);
    assert!(v["checks"].as_object().unwrap().values().all(|c| c["pass"] == true));

    let c = write(&dir, "c.json", &json!({"bounds": ["0.3"], "mu": "0.1"}));
    assert_eq!(tribes(&["construct", "--input", p(&c)]).code, exit::INFEASIBLE);

    // Budgets [1, 1] give a single tribe of size 2, which tops out at 1/4.
    let d = write(&dir, "d.json", &json!({"bounds": ["1", "1"], "mu": "0.5"}));
    assert_eq!(tribes(&["construct", "--input", p(&d)]).code, exit::INFEASIBLE);
}

#[test]
fn construct_input_errors() {
    let dir = TempDir::new().unwrap();
    let no_mu = write(&dir, "a.json", &json!({"bounds": ["1", "1"]}));
    assert_eq!(tribes(&["construct", "--input", p(&no_mu)]).code, exit::INPUT_ERROR);
    for mu in ["0", "1", "1.5", "abc"] {
        let o = tribes(&["construct", "--input", p(&no_mu), "--mu", mu]);
        assert_eq!(o.code, exit::INPUT_ERROR, "mu {mu}");
    }
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    assert_eq!(tribes(&["construct", "--input", p(&bad)]).code, exit::INPUT_ERROR);
    let missing = dir.path().join("missing.json");
    assert_eq!(tribes(&["construct", "--input", p(&missing)]).code, exit::INPUT_ERROR);
    assert_eq!(tribes(&["construct"]).code, exit::INPUT_ERROR);
    assert_eq!(tribes(&["--help"]).code, exit::SUCCESS);
}

#[test]
fn mu_flag_overrides_document() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &json!({"bounds": ["1", "1", "1", "1"], "mu": "0.25"}));
    let o = tribes(&["construct", "--input", p(&a), "--mu", "0.3"]);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["mu"], "0.3");
    assert_eq!(v["m_star"], 2);
}

#[test]
fn exact_verification_beyond_cap_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &json!({"bounds": vec!["1"; 30], "mu": "0.97"}));
    let o = tribes(&["construct", "--input", p(&a), "--verify", "exact"]);
    assert_eq!(o.code, exit::INPUT_ERROR);
    assert!(o.stderr.contains("cap"));
    let o = tribes(&["construct", "--input", p(&a), "--samples", "20000"]);
    assert_eq!(o.code, exit::SUCCESS, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["verification"]["mode"], "sampled");
    assert_eq!(v["verification"]["seed"], 42);
}

#[test]
fn construct_then_verify_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = write(
        &dir,
        "a.json",
        &json!({"bounds": ["0.9", "0.05", "1", "0.6", "0.7", "0.3"], "mu": "0.3"}),
    );
    let report = dir.path().join("report.json");
    let o = tribes(&["construct", "--input", p(&a), "--verify", "none", "--output", p(&report)]);
    assert!(o.stdout.is_empty());
    assert!(o.code == exit::SUCCESS || o.code == exit::UNGUARANTEED);
    let original: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(original.get("verification").is_none());

    let o = tribes(&["verify", "--input", p(&report)]);
    assert_eq!(o.code, exit::SUCCESS, "{}", o.stderr);
    let mut verified: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(verified["verification"]["passed"], true);
    verified.as_object_mut().unwrap().remove("verification");
    assert_eq!(verified, original);
}

fn example_a_report(dir: &TempDir) -> Value {
    let a = write(dir, "a.json", &json!({"bounds": ["1", "1", "1", "1"], "mu": "0.25"}));
    serde_json::from_str(&tribes(&["construct", "--input", p(&a)]).stdout).unwrap()
}

#[test]
fn verify_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let report = example_a_report(&dir);

    let path = write(&dir, "ok.json", &report);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::SUCCESS);

    let mut tampered = report.clone();
    tampered["expectation"] = json!({"mantissa": "1", "exponent": 1, "approx": 0.5});
    let path = write(&dir, "e.json", &tampered);
    let o = tribes(&["verify", "--input", p(&path)]);
    assert_eq!(o.code, exit::VERIFICATION_FAILURE);
    assert!(o.stderr.contains("expectation"), "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["verification"]["passed"], false);

    let mut tampered = report.clone();
    tampered["influences"][3]["mantissa"] = json!("1");
    tampered["influences"][3]["exponent"] = json!(4);
    let path = write(&dir, "i.json", &tampered);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::VERIFICATION_FAILURE);

    let mut tampered = report.clone();
    tampered["checks"]["influence-strict"]["pass"] = json!(false);
    let path = write(&dir, "c.json", &tampered);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::VERIFICATION_FAILURE);

    let mut tampered = report.clone();
    tampered["m_star"] = json!(2);
    tampered["var_map"] = json!([1, 2, 3, 4]);
    let path = write(&dir, "m.json", &tampered);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::VERIFICATION_FAILURE);
}

#[test]
fn verify_rejects_malformed_reports() {
    let dir = TempDir::new().unwrap();
    let report = example_a_report(&dir);

    let mut missing = report.clone();
    missing.as_object_mut().unwrap().remove("tribe_sizes");
    let path = write(&dir, "missing.json", &missing);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::INPUT_ERROR);

    let mut bad = report.clone();
    bad["m_star"] = json!(7);
    let path = write(&dir, "mstar.json", &bad);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::INPUT_ERROR);

    let mut bad = report.clone();
    bad["influences"][0]["bound"] = json!("2");
    let path = write(&dir, "bound.json", &bad);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::INPUT_ERROR);

    let mut bad = report;
    bad["expectation"]["mantissa"] = json!("one");
    let path = write(&dir, "mantissa.json", &bad);
    assert_eq!(tribes(&["verify", "--input", p(&path)]).code, exit::INPUT_ERROR);
}

#[test]
fn diagnostics_for_two_tribes() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &json!({"bounds": ["1", "1", "1", "1"], "mu": "0.3"}));
    let v: Value = serde_json::from_str(&tribes(&["construct", "--input", p(&a)]).stdout).unwrap();
    assert_eq!(v["tribe_sizes"], json!([2, 2]));
    assert_eq!(v["m_star"], 2);
    let kkl = v["diagnostics"]["kkl_ratio"].as_f64().unwrap();
    assert!((kkl - 64.0 / 21.0).abs() < 1e-9);
    let tal = v["diagnostics"]["talagrand_ratio"].as_f64().unwrap();
    assert!((tal - 2.5239).abs() < 1e-3);
}
