use std::path::Path;
use std::process::{Command, Output};

fn mvflow(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvflow")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn solve_zero_kernel_writes_report_and_flow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = write(dir.path(), "c.toml", "kernel = \"zero\"\ngrid = 128\ntime_count = 5\n");
    let o = mvflow(&["--config", &cfg, "--out", out.to_str().unwrap(), "solve"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("report.csv").exists());
    assert!(out.join("report.json").exists());
    assert!(out.join("flow.bin").metadata().unwrap().len() > 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("linf_error_vs_exact"));

    let again = mvflow(&["--out", out.to_str().unwrap(), "report"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&again.stdout).contains("iterations"));
}

#[test]
fn failing_rows_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // An impossible tolerance makes the zero-kernel solve fail its check.
    let cfg = write(dir.path(), "c.toml", "kernel = \"zero\"\ngrid = 128\ntime_count = 5\ntol_null_zero = -1.0\n");
    let o = mvflow(&["--config", &cfg, "--out", "run", "solve"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn inadmissible_indices_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "kernel = \"zero\"\ndelta = 1.5\nk = 1\nkappa = 0.0\n");
    let o = mvflow(&["--config", &cfg, "--out", "run", "solve"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("existence condition fails: eta = "), "{err}");
    assert!(!dir.path().join("run").exists());
}

#[test]
fn unknown_kernel_and_experiment_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "kernel = \"coulomb\"\n");
    let o = mvflow(&["--config", &cfg, "solve"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown kernel"));

    let o = mvflow(&["experiment", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown experiment"));
}

#[test]
fn named_experiment_accepts_hyphens_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = mvflow(&["--seed", "5", "--out", "m", "experiment", "metrics-oracles"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = mvflow_bench::read_report_json(&dir.path().join("m/report.json")).unwrap();
    assert_eq!(rep.provenance.seed, 5);
    assert_eq!(rep.provenance.experiment, "metrics_oracles");
}

#[test]
fn report_without_stored_run_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = mvflow(&["--out", "missing", "report"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
