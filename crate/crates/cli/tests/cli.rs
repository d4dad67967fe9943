use std::path::Path;
use std::process::{Command, Output};

const QUARTIC4: &str = r#"{"problem": "synthetic-bef",
  "bef": {"dimension": 4, "basis": "canonical", "contrasts": [
    {"kind": "monomial", "weight": 1.0, "power": 4.0}, {"kind": "monomial", "weight": 1.0, "power": 4.0},
    {"kind": "monomial", "weight": 1.0, "power": 4.0}, {"kind": "monomial", "weight": 1.0, "power": 4.0}]},
  "randomize_basis": true, "repeats": 5, "seed": 3}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hidden-basis")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn recover_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", QUARTIC4);
    let out = run(&["recover", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "repeat,seed,m,d,epsilon,max_error,jumps_used,failed");
    assert_eq!(lines.len(), 6);
    assert!(!csv.contains('\r'));
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["failure_rate"], 0.0);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", QUARTIC4);
    let out_path = dir.path().join("rows.csv");
    let out = run(&["recover", "--config", &cfg, "--repeats", "2", "--seed", "9", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().count(), 3);
    // With --out the summary moves to stdout.
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["repeats"], 2);
}

#[test]
fn seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", QUARTIC4);
    let a = run(&["recover", "--config", &cfg, "--seed", "1"]).stdout;
    let b = run(&["recover", "--config", &cfg, "--seed", "2"]).stdout;
    let c = run(&["recover", "--config", &cfg, "--seed", "1"]).stdout;
    assert_ne!(a, b);
    assert_eq!(a, c);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["recover", "--config", missing.to_str().unwrap()]).status.code(), Some(1));

    let bad = write(dir.path(), "bad.json", r#"{"problem": "synthetic-bef", "unknown_key": 1}"#);
    assert_eq!(run(&["recover", "--config", &bad]).status.code(), Some(1));

    let no_input = write(dir.path(), "ica.json", r#"{"problem": "ica", "input": "/definitely/not/here.csv"}"#);
    let out = run(&["recover", "--config", &no_input]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn strict_mode_reports_failures_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // A huge perturbation makes recovery fail against the 0.1 threshold.
    let cfg = write(
        dir.path(),
        "p.json",
        &QUARTIC4.replace(r#""repeats": 5"#, r#""repeats": 3, "perturbation": {"epsilon": 5.0, "mode": "seeded-random"}"#),
    );
    let out = run(&["recover", "--config", &cfg, "--strict"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let ok = run(&["recover", "--config", &write(dir.path(), "q.json", QUARTIC4), "--strict"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn fixed_points_lists_all_classes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", QUARTIC4);
    let out = run(&["fixed-points", "--config", &cfg, "--strict"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 15);
}

#[test]
fn gen_writes_headerless_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        r#"{"problem": "ica", "generator": {"kind": "ica", "sources": ["uniform", "laplace"], "mixing_seed": 1, "n": 50}}"#,
    );
    let out = run(&["gen", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 50);
    assert!(text.lines().all(|l| l.split(',').count() == 2 && l.split(',').all(|x| x.parse::<f64>().is_ok())));

    // The generated file feeds straight back in as ICA input.
    let data = write(dir.path(), "x.csv", &text);
    let rec = write(dir.path(), "r.json", &format!(r#"{{"problem": "ica", "input": "{data}"}}"#));
    assert!(run(&["recover", "--config", &rec]).status.success());
}

#[test]
fn convergence_order_and_sweep_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"problem": "synthetic-bef", "starts": 3, "dimension": 4}"#);
    let out = run(&["convergence-order", "--config", &cfg, "--strict"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("kind,power,start,order"));

    let sweep = write(dir.path(), "s.json", &QUARTIC4.replace(r#""repeats": 5"#, r#""repeats": 4, "epsilons": [1e-6, 1e-4]"#));
    let out = run(&["perturb-sweep", "--config", &sweep]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}
