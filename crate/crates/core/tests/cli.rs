use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const EXIT_PARSE: i32 = 2;
const EXIT_INVALID: i32 = 3;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

struct Outcome {
    code: i32,
    report: Option<Value>,
    stderr: String,
}

fn pmi(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_pmi")).args(args).output().unwrap();
    Outcome {
        code: out.status.code().unwrap(),
        report: serde_json::from_slice(&out.stdout).ok(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn ok(args: &[&str]) -> Value {
    let o = pmi(args);
    assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
    o.report.unwrap()["results"].clone()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn close(v: &Value, expected: f64, tol: f64) {
    let got = v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"));
    assert!((got - expected).abs() <= tol, "{got} vs {expected}");
}

fn bb84_with(dir: &TempDir, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(fixture("bb84.json")).unwrap()).unwrap();
    edit(&mut v);
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

#[test]
fn validate_reports_structure() {
    let r = ok(&["validate", "--input", path(&fixture("bb84.json"))]);
    assert_eq!(r["valid"], true);
    assert_eq!(r["dimension"], 2);
    assert_eq!(r["distribution"], "product_uniform_x");
    assert_eq!(r["classical"], false);
    let r = ok(&["validate", "--input", path(&fixture("xor_classical.json"))]);
    assert_eq!(r["classical"], true);
}

#[test]
fn validate_rejects_bad_trace() {
    let dir = TempDir::new().unwrap();
    let p = bb84_with(&dir, "trace.json", |v| v["items"][0]["matrix"][0][0][0] = 0.9.into());
    let o = pmi(&["validate", "--input", path(&p)]);
    assert_eq!(o.code, EXIT_INVALID);
    let err = &o.report.unwrap()["error"];
    assert_eq!(err["exit_code"], EXIT_INVALID);
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{\"dimension\": 2, ").unwrap();
    assert_eq!(pmi(&["validate", "--input", path(&p)]).code, EXIT_PARSE);
    assert_eq!(pmi(&["validate", "--input", "/nonexistent/file.json"]).code, EXIT_PARSE);
    assert_eq!(pmi(&["solve"]).code, EXIT_PARSE);
    assert_eq!(pmi(&["frobnicate"]).code, EXIT_PARSE);
}

#[test]
fn solve_bb84_both_modes() {
    let target = 0.5 + 0.5f64.sqrt() / 2.0;
    let r = ok(&["solve", "--input", path(&fixture("bb84.json"))]);
    assert_eq!(r["mode"], "pmi");
    // no gain from the announced basis
    close(&r["solution"]["primal"], target, 1e-6);
    assert_eq!(r["certificate"]["verdict"], true);
    let r = ok(&["solve", "--input", path(&fixture("bb84.json")), "--mode", "standard"]);
    close(&r["solution"]["primal"], target, 1e-6);
    assert_eq!(r["certificate"]["verdict"], true);
}

#[test]
fn bound_sandwich() {
    let r = ok(&["bound", "--input", path(&fixture("bb84.json"))]);
    assert_eq!(r["verdict"], true);
    let (lo, sdp, hi) = (r["lower"].as_f64().unwrap(), r["sdp"].as_f64().unwrap(), r["upper"].as_f64().unwrap());
    assert!(lo <= sdp + 1e-6 && sdp <= hi + 1e-6);
    let r = ok(&["bound", "--input", path(&fixture("bb84.json")), "--mode", "upper", "--alpha", "2,3"]);
    assert_eq!(r["alphas"], serde_json::json!([2.0, 3.0]));
    assert!(r.get("lower").is_none());
}

#[test]
fn bound_rejects_bad_inputs() {
    let dir = TempDir::new().unwrap();
    let p = bb84_with(&dir, "skewed.json", |v| {
        for (i, q) in [0.4, 0.1, 0.1, 0.4].into_iter().enumerate() {
            v["items"][i]["prob"] = q.into();
        }
    });
    assert_eq!(ok(&["validate", "--input", path(&p)])["distribution"], "general");
    assert_eq!(pmi(&["bound", "--input", path(&p), "--mode", "lower"]).code, EXIT_INVALID);
    let bb84 = fixture("bb84.json");
    assert_eq!(pmi(&["bound", "--input", path(&bb84), "--mode", "upper", "--alpha", "0.5"]).code, EXIT_INVALID);
}

#[test]
fn clifford_analyze_and_measure() {
    let theta = 3.0 * std::f64::consts::FRAC_PI_4;
    let r = ok(&["clifford", "analyze", "--input", path(&fixture("clifford_theta.json"))]);
    close(&r["p_pmi"], 0.5 + 0.5 * (theta / 2.0).cos().abs().max((theta / 2.0).sin().abs()), 1e-9);
    let r = ok(&["clifford", "measure", "--input", path(&fixture("clifford_bb84.json"))]);
    close(&r["p_pmi"], 0.5 + 1.0 / (2.0 * 2f64.sqrt()), 1e-12);
    assert_eq!(r["certificate"]["verdict"], true);
}

#[test]
fn clifford_make_useless_writes_next_to_input() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("enc.json");
    std::fs::copy(fixture("clifford_theta.json"), &input).unwrap();
    let r = ok(&["clifford", "make-useless", "--input", path(&input)]);
    let out = dir.path().join("enc.useless.json");
    assert_eq!(r["output"], path(&out));
    assert!(out.exists());
    assert_eq!(r["useless_after"], true);
    close(&r["delta_after"]["value"], 0.0, 1e-6);
    assert_eq!(r["p_pmi_before"], r["p_pmi_after"]);
    let again = ok(&["clifford", "analyze", "--input", path(&out)]);
    assert_eq!(again["useless"], true);
}

#[test]
fn chsh_on_fixtures() {
    let r = ok(&["chsh", "--input", path(&fixture("xor_classical.json"))]);
    close(&r["game_value"], 0.75, 1e-6);
    assert_eq!(r["classical"], true);
    assert_eq!(r["violates_classical_bound"], false);

    let r = ok(&["chsh", "--input", path(&fixture("bb84.json"))]);
    close(&r["game_value"], 0.5 + 1.0 / (2.0 * 2f64.sqrt()), 1e-6);
    assert_eq!(r["classical"], false);
    assert_eq!(r["relabeling_useless_possible"], Value::Null);
    assert_eq!(r["violates_classical_bound"], true);

    let r = ok(&["chsh", "--input", path(&fixture("classical_34.json"))]);
    assert_eq!(r["classical"], true);
    assert!(r["game_value"].as_f64().unwrap() <= 0.75 + 1e-6);
}

#[test]
fn verify_oracles_agree() {
    let bb84 = fixture("bb84.json");
    let r = ok(&["verify", "--input", path(&bb84), "--oracle", "grid", "--steps", "64"]);
    assert!(r["difference"].as_f64().unwrap().abs() <= 1e-6);
    let r = ok(&["verify", "--input", path(&bb84), "--oracle", "helstrom", "--mode", "standard"]);
    assert!(r["difference"].as_f64().unwrap().abs() <= 1e-6);
    let r = ok(&["verify", "--input", path(&fixture("xor_classical.json")), "--oracle", "classical"]);
    close(&r["oracle_value"], 1.0, 1e-12);
    // the ML decoder needs commuting states
    assert_ne!(pmi(&["verify", "--input", path(&bb84), "--oracle", "classical"]).code, 0);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        let o = pmi(&["--json-out", path(&out), "solve", "--input", path(&fixture("bb84.json"))]);
        assert_eq!(o.code, 0);
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let report: pmi_core::cli::RunReport = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(serde_json::to_value(&report).unwrap(), v);
        v.as_object_mut().unwrap().remove("timings_ms");
        reports.push((v, report));
    }
    assert_eq!(reports[0].0, reports[1].0);
    let report = &reports[0].1;
    assert_eq!(report.command, "solve");
    assert_eq!(report.inputs.len(), 1);
    assert_eq!(report.inputs[0].sha256.len(), 64);
    assert!(report.error.is_none());
}
