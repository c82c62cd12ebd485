//! The `bura` binary: config handling, outputs and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bura(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bura")).args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn solve_outputs_are_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"solve": {"alpha": 0.5, "k": 7, "dim": 2, "n": 31, "rhs": 2, "kprime": 5}}"#).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("t{threads}"));
        let o = bura(&["--config", cfg.to_str().unwrap(), "--threads", threads, "--out", out.to_str().unwrap(), "solve"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((read(&out, "certificates.csv"), read(&out, "shifts.csv"), read(&out, "coefficients.txt")));
    }
    assert_eq!(outputs[0], outputs[1]);
    let cert = &outputs[0].0;
    assert!(cert.starts_with("rhs,method,alpha,k,kprime,relative_error,bound,slack,max_iterations,pass\n"));
    assert!(cert.lines().skip(1).all(|l| l.contains(",RS-BURA,0.5,7,5,") && l.ends_with(",true")));
    assert!(!cert.contains('\r'));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"approx": {"alpha": 0.9, "k": 3}, "precision": 64}"#).unwrap();
    let out = tmp.path().join("o");
    let o = bura(&["--config", cfg.to_str().unwrap(), "--precision", "32", "--out", out.to_str().unwrap(), "approx", "--k", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bary = read(&out, "barycentric.txt");
    assert!(bary.starts_with("barycentric alpha=9e-1 k=2 precision=32\n"), "{bary}");
    assert!(read(&out, "partial_fractions.txt").starts_with("partial-fractions alpha=9e-1 k=2 precision=32\n"));
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["converged"], true);
}

#[test]
fn table_holes_fail_and_bad_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = bura(&["--out", out.to_str().unwrap(), "table1", "--alphas", "0.5", "--accuracies", "1e-3,1e-6", "--max-k", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read(&out, "table1.csv"), "accuracy,alpha=0.5\n1e-3,4\n1e-6,\n");

    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"table1": {"accuracies": [1e-4, 1e-3]}}"#).unwrap();
    let o = bura(&["--config", cfg.to_str().unwrap(), "table1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly decreasing"));
}

#[test]
fn suggest_and_figure_write_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = bura(&["--out", out.to_str().unwrap(), "suggest-kprime", "--alpha", "0.5", "--k", "13", "--delta", "1e-4", "--target-order", "-7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let orders = read(&out, "gap_orders.csv");
    assert_eq!(orders.lines().count(), 13);
    let o = bura(&["--out", out.to_str().unwrap(), "figure1", "--alpha", "0.5", "--k", "13", "--kprime", "9", "--deltas", "1e-4", "--samples", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out, "figure1.csv").lines().count(), 51);
    assert!(read(&out, "figure1_summary.csv").starts_with("delta,k,kprime,E,Etilde,gap_bound,gap_order\n1e-4,13,9,"));
}
