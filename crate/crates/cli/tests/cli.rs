use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gkura(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkura"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn help_matches_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gkura(tmp.path(), &["--help"]);
    assert!(out.status.success());
    let expected = include_str!("snapshots/help.txt");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn ungated_population_synchronizes_and_gate_slows_it() {
    let tmp = tempfile::tempdir().unwrap();
    let free = gkura(tmp.path(), &["simulate", "--out", "free", "--seed", "3", "--set", "gate.enabled=false"]);
    assert!(free.status.success(), "{}", String::from_utf8_lossy(&free.stderr));
    let gated = gkura(tmp.path(), &["simulate", "--out", "gated", "--seed", "3", "--set", "gate.w=3.141592653589793"]);
    assert!(gated.status.success());

    let f = summary(&tmp.path().join("free"));
    let t_free = f["t_conv"].as_f64().expect("ungated run converges");
    assert!(t_free < 1000.0);
    assert!(f["final_r"].as_f64().unwrap() > 1.0 - 1e-4);
    let g = summary(&tmp.path().join("gated"));
    if let Some(t) = g["t_conv"].as_f64() {
        assert!(t > t_free, "gated {t} vs free {t_free}");
    }
    assert_eq!(g["config"]["init"]["seed"], 3);
    assert!(tmp.path().join("gated/trajectory.csv").exists());
}

#[test]
fn malformed_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "{\"model\": ").unwrap();
    let out = gkura(tmp.path(), &["simulate", "--config", "bad.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());

    std::fs::write(tmp.path().join("typo.json"), r#"{"gate": {"width": 1.0}}"#).unwrap();
    let out = gkura(tmp.path(), &["simulate", "--config", "typo.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn invalid_values_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gkura(tmp.path(), &["simulate", "--out", "o", "--set", "gate.k=-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn unknown_figure_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gkura(tmp.path(), &["figures", "fig9", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn partial_sweep_failure_exits_4_and_keeps_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gkura(
        tmp.path(),
        &["sweep", "--out", "o", "--set", r#"run.axes=[{"param":"k","values":[10,-1]}]"#, "--set", "integration.t_end=50"],
    );
    assert_eq!(out.status.code(), Some(4));
    let csv = std::fs::read_to_string(tmp.path().join("o/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sweep_output_is_deterministic_across_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str, jobs: &'static str| {
        vec![
            "sweep",
            "--kind",
            "sweep-convergence",
            "--out",
            out,
            "--jobs",
            jobs,
            "--set",
            r#"run.axes=[{"param":"K","values":[0.2,0.4]},{"param":"w","values":[0,3.14159]}]"#,
            "--set",
            "run.replicate_seeds=[1,2]",
            "--set",
            "integration.t_end=300",
        ]
    };
    assert!(gkura(tmp.path(), &args("a", "1")).status.success());
    assert!(gkura(tmp.path(), &args("b", "3")).status.success());
    let a = std::fs::read(tmp.path().join("a/sweep.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b/sweep.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 8);
}

#[test]
fn locked_and_poincare_write_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let hetero = r#"model.omega={"period_range":[23,25]}"#;
    let out = gkura(tmp.path(), &["locked", "--out", "l", "--set", hetero, "--set", "gate.w=1.0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("l/locked.json")).unwrap()).unwrap();
    assert_eq!(rep["converged"], true);
    assert_eq!(rep["verdict"], "stable");
    assert_eq!(rep["vartheta"].as_array().unwrap().len(), 20);
    assert_eq!(rep["config"]["gate"]["w"], 1.0);

    let out = gkura(
        tmp.path(),
        &["poincare", "--out", "p", "--set", hetero, "--set", "gate.enabled=false", "--set", "integration.t_end=3000"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("p/verdict.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "locked");
    assert_eq!(v["config"]["gate"]["frame"], "mean_phase");
    assert!(tmp.path().join("p/poincare.csv").exists());
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("c.json"),
        r#"{"init": {"seed": 5}, "integration": {"t_end": 20}, "run": {"out": "from_file"}}"#,
    )
    .unwrap();
    let out = gkura(tmp.path(), &["simulate", "--config", "c.json", "--seed", "9", "--out", "from_flag"]);
    assert!(out.status.success());
    assert!(!tmp.path().join("from_file").exists());
    let s = summary(&tmp.path().join("from_flag"));
    assert_eq!(s["config"]["init"]["seed"], 9);
    assert_eq!(s["config"]["integration"]["t_end"], 20.0);
}

#[test]
fn figure_bundle_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = gkura(tmp.path(), &["figures", "fig4", "--out", out, "--seed", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |d: &str| std::fs::read(tmp.path().join(d).join("fig4/fig4_manifest.json")).unwrap();
    assert_eq!(read("a"), read("b"));
    let m: Value = serde_json::from_slice(&read("a")).unwrap();
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["fig4_A.csv", "fig4_B.csv", "fig4_C.csv", "fig4_offsets.csv"]);
}
