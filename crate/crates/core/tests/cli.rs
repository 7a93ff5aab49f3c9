use std::path::Path;
use std::process::{Command, Output};

fn wavekin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavekin"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn small_config(dir: &Path, extra: &str) -> String {
    let text = format!(
        r#"{{
  "grid": {{ "x_extent": 3.0, "v_extent": 3.0, "nx": 4, "nv": 4 }},
  "nt": 3,
  "samples": {{ "contraction_pairs": 1, "lemma_samples": 50, "oracle_eps": 0.05 }},
  "experiments": ["envelope", "contraction", "stability", "nesting", "lemma_checks", "oracle_checks"]{extra}
}}"#
    );
    let path = dir.join("scenario.json");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn vacuum_scenario_passes_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = dir.path().join("out");
    let res = wavekin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(read(&out, "envelope.csv").starts_with("t,sup_weighted,bound_2R,margin\n"));
    assert!(read(&out, "contraction.csv").starts_with("iter,delta_norm,ratio\n"));
    assert!(read(&out, "nesting.csv").starts_with("iter,sup_gap,min_l,monotonicity_violation\n"));
    assert!(read(&out, "stability.csv").starts_with("t,diff_norm,ratio_vs_2\n"));
    assert_eq!(read(&out, "envelope.csv").lines().count(), 1 + 4);
    assert!(read(&out, "envelope.csv").lines().skip(1).all(|l| l.split(',').nth(1) == Some("0e0")));
    assert!(read(&out, "stability.csv").lines().skip(1).all(|l| l.split(',').nth(1) == Some("0e0")));
    let meta: serde_json::Value = serde_json::from_str(&read(&out, "metadata.json")).unwrap();
    assert!(meta["constants"]["r_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn failed_check_gives_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#",
  "initial_data": { "terms": [{ "amplitude": 0.01, "x_center": [0, 0], "v_center": [0, 0], "x_rate": 1.5, "v_rate": 1.5 }] },
  "tolerances": { "stability": 0.5, "agreement": 5e-7, "lemma_slack": 1e-8, "oracle": 0.01 }"#;
    let cfg = small_config(dir.path(), extra);
    let out = dir.path().join("out");
    let res = wavekin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("FAILED stability ratio"));
    let checks = read(&out, "checks.csv");
    assert!(checks
        .lines()
        .any(|l| l.starts_with("stability ratio,") && l.ends_with(",false,true")));
}

#[test]
fn oversized_data_is_an_error_naming_both_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#",
  "initial_data": { "terms": [{ "amplitude": 0.5, "x_center": [0, 0], "v_center": [0, 0], "x_rate": 1.0, "v_rate": 1.0 }] }"#;
    let cfg = small_config(dir.path(), extra);
    let res = wavekin(&["run", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(
        err.contains("norm 5.000000e-1") && err.contains("R_max = 2.592117e-2"),
        "{err}"
    );
}

#[test]
fn seed_and_threads_do_not_change_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#",
  "initial_data": { "terms": [{ "amplitude": 0.01, "x_center": [0.2, 0], "v_center": [0, -0.3], "x_rate": 1.5, "v_rate": 1.5 }] }"#;
    let cfg = small_config(dir.path(), extra);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(wavekin(&[
        "run",
        &cfg,
        "--out",
        a.to_str().unwrap(),
        "--threads",
        "1",
        "--seed",
        "4"
    ])
    .status
    .success());
    let res = Command::new(env!("CARGO_BIN_EXE_wavekin"))
        .args(["run", &cfg, "--out", b.to_str().unwrap(), "--seed", "4"])
        .env("WAVEKIN_THREADS", "2")
        .output()
        .unwrap();
    assert!(res.status.success());
    for name in [
        "envelope.csv",
        "contraction.csv",
        "probes.csv",
        "stability.csv",
        "nesting.csv",
        "lemmas.csv",
        "checks.csv",
    ] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn check_constants_prints_desk_values() {
    let res = wavekin(&["check-constants", "--alpha", "1", "--beta", "1", "--dim", "2"]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("c_d") - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((value("K_beta") - 15.503138).abs() < 1e-5);
    assert!((value("R_max") - 0.0259212).abs() < 1e-7);
}

#[test]
fn oracle_subcommand_reports_both_candidates() {
    let res = wavekin(&["oracle", "--dim", "2", "--eps", "0.05"]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.contains("c_d = d omega_d / 2^d") && text.contains("2^(d-1)"));
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(
        !wavekin(&["check-constants", "--alpha", "-1", "--beta", "1", "--dim", "2"])
            .status
            .success()
    );
    assert!(
        !wavekin(&["check-constants", "--alpha", "1", "--beta", "1", "--dim", "4"])
            .status
            .success()
    );
    assert_eq!(wavekin(&["run", "/nonexistent/scenario.json"]).status.code(), Some(2));
}

#[test]
fn solver_failure_still_leaves_metadata_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#",
  "initial_data": { "terms": [{ "amplitude": 0.01, "x_center": [0, 0], "v_center": [0, 0], "x_rate": 1.5, "v_rate": 1.5 }] },
  "picard": { "max_iters": 1 }"#;
    let cfg = small_config(dir.path(), extra);
    let out = dir.path().join("out");
    let res = wavekin(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no convergence"));
    assert!(out.join("metadata.json").exists());
    assert_eq!(read(&out, "checks.csv"), "check,value,limit,passed,gating\n");
}
