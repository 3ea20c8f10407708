//! End-to-end checks of the binary: exit codes, file outputs, and the
//! pinned summary schema.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tphsd"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.txt");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_succeeds_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\nmax_iters=200\n");
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("trace.csv").is_file());
    assert!(out.join("summary.json").is_file());

    let text = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let records = tphsd_core::trace_from_csv(&text).unwrap();
    assert_eq!(records.len(), 200);
    // lossless round trip through the 17-significant-digit format
    assert_eq!(tphsd_core::trace_to_csv(&records), text);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\na=0.5\nb=0.2\n");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("b > a/2"), "stderr: {stderr}");

    let cfg = write_config(dir.path(), "problem=quad\nwhat=ever\n");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // an absurd eta0 overflows the iterate within a few steps
    let cfg = write_config(dir.path(), "problem=quad\neta0=1e300\nmax_iters=50\n");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn rank_deficient_diagnose_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=sin\nn=1\n");
    // y = c makes sin(x + y - c) = 0, so the Jacobian column vanishes
    let status = bin()
        .args(["diagnose", "--config"])
        .arg(&cfg)
        .args(["--point", "0,2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn diagnose_reports_hand_checked_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\n");
    let out = bin()
        .args(["diagnose", "--config"])
        .arg(&cfg)
        .args(["--point", "0,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let grab = |key: &str| -> Vec<f64> {
        stdout
            .lines()
            .find(|l| l.starts_with(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("missing '{key}' in:\n{stdout}"))
            .split(" = ")
            .nth(1)
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect()
    };
    assert!((grab("p")[0] - 0.5).abs() <= 1e-14);
    assert!((grab("sigma_min")[0] - 2f64.sqrt()).abs() <= 1e-12);
    let a = grab("a_map");
    assert!((a[0] - 0.5).abs() <= 1e-12 && (a[1] - 0.5).abs() <= 1e-12);
    assert!((grab("stationarity_residual")[0] - 0.5f64.sqrt()).abs() <= 1e-12);
    assert!((grab("multiplier")[0] + 1.5).abs() <= 1e-12);

    // the hand-solved KKT point
    let out = bin()
        .args(["diagnose", "--config"])
        .arg(&cfg)
        .args(["--point", "0,0"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("stationarity_residual = 0.0000000000000000e0"));
    assert!(stdout.contains("multiplier = -1.0000000000000000e0"));
    assert!(stdout.contains("feas = 0.0000000000000000e0"));
}

#[test]
fn diagnose_rejects_wrong_point_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=sin\nn=3\n");
    let status = bin()
        .args(["diagnose", "--config"])
        .arg(&cfg)
        .args(["--point", "0,1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn diagnose_is_identity_at_feasible_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=degpow\n");
    let out = bin()
        .args(["diagnose", "--config"])
        .arg(&cfg)
        .args(["--point", "1,1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("a_map = 1.0000000000000000e0,1.0000000000000000e0"),
        "{stdout}"
    );
}

#[test]
fn gradcheck_passes_on_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["problem=sin\nn=3\n", "problem=degpow\n", "problem=quad\n"] {
        let cfg = write_config(dir.path(), body);
        let out = bin()
            .args(["gradcheck", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{body}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
    // quad reports the exact-to-rounding branch rather than an order
    let cfg = write_config(dir.path(), "problem=quad\n");
    let out = bin()
        .args(["gradcheck", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("exact to rounding"));
}

#[test]
fn summary_schema_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\nmax_iters=50\n");
    let out = dir.path().join("out");
    assert!(bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let top = doc.as_object().unwrap();
    let mut keys: Vec<&str> = top.keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        vec![
            "config",
            "final_feas",
            "final_multiplier",
            "final_point",
            "final_stationarity",
            "halvings",
            "iterations",
            "problem",
            "solution_distance",
            "stop_reason",
            "switch_count",
            "wall_time_seconds",
        ]
    );
    let mut cfg_keys: Vec<&str> = top["config"]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    cfg_keys.sort_unstable();
    assert_eq!(
        cfg_keys,
        vec![
            "a",
            "alpha",
            "b",
            "beta",
            "c",
            "eps0",
            "eta0",
            "fd_decay",
            "fd_t0",
            "grad_p_mode",
            "max_iters",
            "n",
            "problem",
            "q",
            "seed",
            "stationarity_every",
            "stop_feas_tol",
            "stop_stat_tol",
            "theta0",
        ]
    );
    assert!(top["final_feas"].is_number());
    assert!(top["final_point"].is_array());
    assert!(top["stop_reason"].is_string());
    assert!(top["iterations"].is_u64());
}

#[test]
fn overrides_take_precedence_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\nalpha=0.5\nmax_iters=20\n");
    let out = dir.path().join("out");
    assert!(bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--set", "alpha=0.99"])
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["alpha"].as_f64().unwrap(), 0.99);
}

#[test]
fn baseline_flag_uses_the_comparator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\nmax_iters=30\n");
    let out = dir.path().join("out");
    assert!(bin()
        .args(["run", "--baseline", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let records = tphsd_core::trace_from_csv(&text).unwrap();
    assert_eq!(records.len(), 30);
    assert!(records.iter().all(|r| r.phase == 1 && r.halvings == 0));
}

#[test]
fn sweep_emits_cells_and_winner() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\nmax_iters=150\n");
    let out = dir.path().join("sweep");
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .args(["--jobs", "2"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 25, "theta tied to eta gives 25 cells");
    for i in 0..25 {
        assert!(out
            .join(format!("cells/cell_{i:03}/summary.json"))
            .is_file());
    }
    assert!(out.join("winner/trace.csv").is_file());
    assert!(out.join("winner/summary.json").is_file());

    // rerun must pick the same winner
    let out2 = dir.path().join("sweep2");
    assert!(bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out2)
        .args(["--jobs", "3"])
        .status()
        .unwrap()
        .success());
    let report2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out2.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["winner_index"], report2["winner_index"]);
    assert_eq!(report["winner_eta0"], report2["winner_eta0"]);
}

#[test]
fn env_var_caps_sweep_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem=quad\nmax_iters=60\n");
    let out = dir.path().join("sweep");
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .env("BILEVEL_TPHSD_THREADS", "1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("winner/summary.json").is_file());
}
