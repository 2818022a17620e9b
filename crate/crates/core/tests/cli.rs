//! End-to-end runs of the `rsma` binary and output round-trips.

use std::path::Path;
use std::process::Command;

use rsma::sweep::{load_result, preset, read_csv, run_sweep, OutputFormat, CSV_COLUMNS};
use rsma::SystemConfig;

fn rsma(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rsma")).args(args).output().expect("spawn rsma")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_prints_every_target() {
    let out = rsma(&["analyze", "--samples", "20000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for t in ["stage_21", "stage_11", "stage_22", "user1", "user2", "throughput"] {
        assert!(text.contains(t), "{text}");
    }
}

#[test]
fn invalid_config_fails_with_named_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "alpha21 = 0.3\nalpha22 = 0.8\n").unwrap();
    let out = rsma(&["analyze", "--no-mc", "--config", path_str(&cfg)]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("alpha21+alpha22") && err.contains("1.1"), "{err}");

    std::fs::write(&cfg, "m1 = 1.5\n").unwrap();
    let out = rsma(&["analyze", "--no-mc", "--config", path_str(&cfg)]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("integer"));

    std::fs::write(&cfg, "m3 = 2\n").unwrap();
    assert!(!rsma(&["analyze", "--no-mc", "--config", path_str(&cfg)]).status.success());
}

#[test]
fn axis_sweep_writes_csv_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("phi.csv");
    let out = rsma(&[
        "sweep", "--axis", "rate_split", "--from", "0.05", "--to", "0.95", "--step", "0.05", "--methods",
        "closed_form,monte_carlo", "--samples", "5000", "--out", path_str(&out_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    let res = read_csv(text.as_bytes()).unwrap();
    // 19 points × 2 methods × 7 rows; infeasible points are kept and flagged
    assert_eq!(res.rows.len(), 19 * 14);
    assert!(res.rows.iter().any(|r| r.infeasible));
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').count(), 9);
    }
}

#[test]
fn preset_output_reloads_to_identical_result() {
    let dir = tempfile::tempdir().unwrap();
    for fmt in ["csv", "json"] {
        let out_path = dir.path().join(format!("fig3.{fmt}"));
        let out = rsma(&["sweep", "--preset", "fig3", "--samples", "20000", "--seed", "8", "--out", path_str(&out_path)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let p = preset("fig3", &SystemConfig::default(), 8, 20_000).unwrap();
        for s in &p.series {
            let file = dir.path().join(format!("fig3.{}.{fmt}", s.label));
            let reloaded = load_result(&file, fmt.parse::<OutputFormat>().unwrap()).unwrap();
            assert_eq!(reloaded, run_sweep(&s.spec).unwrap(), "{}", file.display());
        }
    }
}

#[test]
fn spec_file_sweep_over_xi_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("xi.toml");
    std::fs::write(&spec, "axis = \"xi_pair\"\nvalues = [\"0:0.1\", \"0.1:0\"]\nmethods = [\"closed_form\", \"asymptotic\"]\n").unwrap();
    let out = rsma(&["sweep", "--spec", path_str(&spec), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let res = rsma::sweep::read_json(&out.stdout[..]).unwrap();
    assert_eq!(res.rows.len(), 2 * 2 * 7);
    assert_eq!(res.rows[0].axis_value.to_string(), "0:0.1");
}

#[test]
fn unwritable_output_names_the_path() {
    let out = rsma(&["sweep", "--axis", "tx_power_dbm", "--from", "0", "--to", "2", "--step", "1", "--out", "/nonexistent-dir/x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("/nonexistent-dir/x.csv"));
}

#[test]
fn missing_sweep_source_is_an_error() {
    assert!(!rsma(&["sweep"]).status.success());
    assert!(!rsma(&["sweep", "--preset", "fig9"]).status.success());
}
