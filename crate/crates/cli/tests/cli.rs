use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn isopair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isopair"))
        .args(args)
        .env_remove("ISOPAIR_TOL")
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = isopair(args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    });
    (out.status.code().unwrap(), report)
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

fn spectrum(report: &Value) -> Vec<f64> {
    report["defect"]["report"]["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn verdicts(report: &Value) -> Vec<bool> {
    let v = report["defect"]["report"]["verdicts"].as_object().unwrap();
    v.values().map(|b| b.as_bool().unwrap()).collect()
}

#[test]
fn swap_report_has_all_false_verdicts() {
    let (code, r) = run_json(&["analyze", &f("swap.json")]);
    assert_eq!(code, 0, "{:#}", r["consistency"]);
    assert_eq!(verdicts(&r), vec![false; 5]);
    let nonzero: Vec<f64> = spectrum(&r).into_iter().filter(|x| x.abs() > 1e-9).collect();
    assert_eq!(nonzero.len(), 2);
    assert!((nonzero[0] + 1.0).abs() < 1e-9 && (nonzero[1] - 1.0).abs() < 1e-9);
    assert_eq!(r["extraction"]["round_trip_verdict"], "true");
    assert!(r["analytic"]["theta_V1V2"]["bridge_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn trivial_report_has_zero_defect() {
    let (code, r) = run_json(&["analyze", &f("trivial.json"), "--degree", "6"]);
    assert_eq!(code, 0);
    assert_eq!(verdicts(&r), vec![true; 5]);
    assert!(spectrum(&r).iter().all(|x| x.abs() < 1e-12));
    assert_eq!(r["config"]["degree"], 6);
}

#[test]
fn bidisc_z1_z2_is_not_doubly_commuting() {
    let (code, r) = run_json(&["analyze", &f("bidisc_z1_z2.json")]);
    assert_eq!(code, 0, "{:#}", r["consistency"]);
    assert_eq!(verdicts(&r), vec![false; 5]);
    assert!(spectrum(&r)[0] <= -0.1);
    assert_eq!(r["input"]["degree"], 10);
    assert_eq!(r["bidisc"]["slocinski"]["applicable"], false);
    assert_eq!(r["wandering"]["finite"]["w1"], false);
    assert!(r["extraction"]["skipped"].is_string());
}

#[test]
fn bidisc_full_space_defect_is_rank_one_projection() {
    let (code, r) = run_json(&["analyze", &f("bidisc_full.json")]);
    assert_eq!(code, 0);
    assert_eq!(verdicts(&r), vec![true; 5]);
    let s = spectrum(&r);
    assert!((s.last().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(s.iter().filter(|x| x.abs() > 1e-9).count(), 1);
    assert_eq!(r["bidisc"]["slocinski"]["pass"], true);
}

#[test]
fn compare_self_and_conjugate() {
    let (code, r) = run_json(&["compare", &f("swap.json"), &f("swap.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "true");
    assert!(r["witness"].is_array());

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let out = isopair(&["construct", "--dim", "3", "--rank", "1", "--seed", "11", "--out", a.to_str().unwrap()]);
    assert!(out.status.success());
    // Conjugate by a diagonal phase and a permutation, written by hand.
    let mut spec: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    for key in ["U", "P"] {
        let m = spec[key].as_array().unwrap().clone();
        let perm = [2usize, 0, 1];
        let phase = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];
        let entry = |i: usize, j: usize| {
            let z = &m[perm[i]][perm[j]];
            let (re, im) = (z[0].as_f64().unwrap(), z[1].as_f64().unwrap());
            let (pi, pj) = (phase[i], (phase[j].0, -phase[j].1));
            let (ar, ai) = (pi.0 * re - pi.1 * im, pi.0 * im + pi.1 * re);
            serde_json::json!([ar * pj.0 - ai * pj.1, ar * pj.1 + ai * pj.0])
        };
        spec[key] = (0..3).map(|i| (0..3).map(|j| entry(i, j)).collect::<Vec<_>>()).collect();
    }
    let b = dir.path().join("b.json");
    std::fs::write(&b, spec.to_string()).unwrap();
    let (code, r) = run_json(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "true");
}

#[test]
fn compare_swap_and_diag_is_false_with_word() {
    let (code, r) = run_json(&["compare", &f("swap.json"), &f("diag.json")]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "false");
    let word = r["distinguishing_word"].as_str().unwrap();
    assert!(!word.is_empty());
    assert_eq!(r["up_route"]["verdict"], "false");
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = isopair(&["analyze", &f("swap.json"), "--degree", "6", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));

    let c1 = isopair(&["construct", "--dim", "4", "--seed", "9"]).stdout;
    let c2 = isopair(&["construct", "--dim", "4", "--seed", "9"]).stdout;
    assert_eq!(c1, c2);
}

#[test]
fn exit_codes() {
    assert_eq!(isopair(&["analyze", &f("bad_schema.json")]).status.code(), Some(2));
    assert_eq!(isopair(&["validate", &f("nonunitary.json")]).status.code(), Some(2));
    assert_eq!(isopair(&["analyze", &f("missing.json")]).status.code(), Some(2));
    assert_eq!(isopair(&["compare", &f("swap.json"), &f("unitary_pair.json")]).status.code(), Some(2));
    assert_eq!(isopair(&["construct", "--dim", "2", "--rank", "3"]).status.code(), Some(2));
    assert_eq!(isopair(&["validate", &f("swap.json")]).status.code(), Some(0));
    // A generator whose projections never settle cannot be modelled.
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("drift.json");
    std::fs::write(
        &p,
        r#"{"generators":[{"terms":[{"a":0,"b":0,"c":[1,0]},{"a":1,"b":0,"c":[1,0]}]}],"degree":6}"#,
    )
    .unwrap();
    assert_eq!(isopair(&["validate", p.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn kind_is_inferred_or_explicit() {
    let (_, r) = run_json(&["validate", &f("diag.json")]);
    assert_eq!(r["input"]["kind"], "bcl");
    let (_, r) = run_json(&["validate", &f("bidisc_z1_z2.json")]);
    assert_eq!(r["input"]["kind"], "bidisc");
    let (_, r) = run_json(&["validate", &f("unitary_pair.json")]);
    assert_eq!(r["input"]["kind"], "matrix-unitary");

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sum.json");
    let parts = format!(
        r#"{{"kind":"direct-sum","parts":[{},{}]}}"#,
        std::fs::read_to_string(fixture("swap.json")).unwrap(),
        std::fs::read_to_string(fixture("unitary_pair.json")).unwrap()
    );
    std::fs::write(&p, parts).unwrap();
    let (code, r) = run_json(&["analyze", p.to_str().unwrap(), "--degree", "5"]);
    assert_eq!(code, 0, "{:#}", r["consistency"]);
    assert_eq!(r["input"]["kind"], "direct-sum");
    assert_eq!(r["model"]["unitary_dim"], 1);
}

#[test]
fn tolerance_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_isopair"))
        .args(["validate", &f("trivial.json")])
        .env("ISOPAIR_TOL", "1e-4")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["config"]["approx_tol"], 1e-4);
    let (_, r) = run_json(&["validate", &f("trivial.json"), "--tol", "1e-7"]);
    assert_eq!(r["config"]["approx_tol"], 1e-7);
}
