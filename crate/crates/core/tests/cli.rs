use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wavejoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavejoint")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_error(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)));
    v["error"].clone()
}

#[test]
fn oracle_eval_reports_stiffness() {
    let o = wavejoint(&["oracle-eval", "--config", "20,4,10,0.5,12"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["ok"], true);
    assert_eq!(v["result"]["in_bounds"], true);
    for k in ["k_xi", "k_eta", "k_zeta"] {
        assert!(v["result"]["stiffness"][k].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn noisy_oracle_eval_stays_within_cap() {
    let exact = stdout_json(&wavejoint(&["oracle-eval", "--config", "20,4,10,0.5,12"]));
    let noisy = stdout_json(&wavejoint(&["oracle-eval", "--config", "20,4,10,0.5,12", "--fidelity", "noisy", "--noise-cap", "0.1"]));
    for k in ["k_xi", "k_eta", "k_zeta"] {
        let e = exact["result"]["stiffness"][k].as_f64().unwrap();
        let n = noisy["result"]["stiffness"][k].as_f64().unwrap();
        // coarse mesh plus at most 10% noise
        assert!((n - e).abs() <= 0.15 * e, "{k}: {n} vs {e}");
    }
}

#[test]
fn failures_are_json_with_nonzero_exit() {
    let o = wavejoint(&["oracle-eval", "--config", "20,4,10"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["kind"], "invalid_spec");

    let o = wavejoint(&["oracle-eval", "--config", "20,4,1,0.5,12"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["kind"], "target_failed");

    let o = wavejoint(&["recover", "--store", "/nonexistent/obs.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["kind"], "missing_file");

    let o = wavejoint(&["recover", "--bounds", r#"{"beta":[0,1]}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_error(&o)["kind"], "invalid_spec");

    let o = wavejoint(&["recover", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_error(&o)["kind"], "usage");
}

fn run_ok(args: &[&str]) -> Value {
    let o = wavejoint(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout_json(&o)
}

#[test]
fn gen_data_then_heatmap_and_recover() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |name: &str| tmp.path().join(name).to_string_lossy().to_string();
    let store = dir("obs.csv");
    run_ok(&["gen-data", "--seed", "3", "--count", "25", "--store", &store, "--out", &dir("gen")]);
    assert!(Path::new(&store).exists());
    assert!(Path::new(&format!("{store}.json")).exists());
    let text = std::fs::read_to_string(&store).unwrap();
    assert_eq!(text.lines().count(), 26);

    let v = run_ok(&["heatmap", "--store", &store, "--resolution", "6", "--out", &dir("heat")]);
    let files = v["result"]["files"].as_array().unwrap();
    // three planes, their metadata and the spec
    assert_eq!(files.len(), 5);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("heat/heatmap.json")).unwrap()).unwrap();
    assert_eq!(meta["planes"][0]["resolution"], 6);
    let plane = std::fs::read_to_string(tmp.path().join("heat/heatmap_k_xi_k_eta.csv")).unwrap();
    assert_eq!(plane.lines().count(), 37);

    let targets = r#"[{"l_t":22,"n_r":4,"h_t":11,"t_h":0.55,"alpha":8}]"#;
    run_ok(&["recover", "--seed", "1", "--budget", "15", "--store", &store, "--targets", targets, "--out", &dir("rec")]);
    let rec = std::fs::read_to_string(tmp.path().join("rec/recovery.csv")).unwrap();
    assert_eq!(rec.lines().count(), 2);
}

#[test]
fn milestone_budget_sets_measurement_count() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ms");
    let target = r#"{"l_t":22,"n_r":4,"h_t":11,"t_h":0.55,"alpha":8}"#;
    run_ok(&[
        "milestone", "--seed", "2", "--target", target, "--sims-per-real", "5", "--budget", "10", "--threshold", "0",
        "--out", out.to_str().unwrap(),
    ]);
    let log = std::fs::read_to_string(out.join("milestones.csv")).unwrap();
    // header plus two measurements of five simulations each
    assert_eq!(log.lines().count(), 3);
}
