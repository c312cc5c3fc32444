use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn acmhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acmhd")).args(args).output().unwrap()
}

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn run_with_minimal_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 8\nepsilon = 0.1\nT = 0.05\ndt = 0.01\n");
    let out = dir.path().join("out");
    let o = acmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("run/series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "time,energy,enstrophy_u,enstrophy_B,div_u,div_B,q_u_L4,q_B_L4");
    assert_eq!(lines.count(), 6);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run/report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "run");
    assert_eq!(report["results"]["steps"], 5);
    assert!(report["build_id"].as_str().is_some_and(|s| !s.is_empty()));
    let echo = acmhd::io::parse_config(report["config"].as_str().unwrap()).unwrap();
    assert_eq!(echo.n, 8);
    assert!(out.join("run/final.bin").exists());
}

#[test]
fn sweep_fans_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 8\nepsilon = 0.1\nT = 0.0625\ndt = 0.015625\nname = \"s\"\n");
    let out = dir.path().join("out");
    let o = acmhd(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--epsilons", "0.1,0.01,0.001"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for i in 0..3 {
        assert!(out.join(format!("s/eps_{i}/series.csv")).exists());
        assert!(out.join(format!("s/eps_{i}/report.json")).exists());
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("s/report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "sweep");
    assert_eq!(report["results"]["runs"].as_array().unwrap().len(), 3);
    let names: Vec<&str> = report["fits"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"q_u"));
}

#[test]
fn diag_on_linear_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "n = 8\nepsilon = 0.01\nT = 0.08\ndt = 0.01\ndata = ill_prepared\ncadence = 1\nname = \"lin\"\n",
    );
    let out = dir.path().join("out");
    let o = acmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--linear", "--checkpoints"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut args = vec!["diag".to_string(), "--config".into(), cfg.clone(), "--out".into(), dir.path().join("d").to_str().unwrap().into(), "--linear".into()];
    for k in 0..=8 {
        args.push("--checkpoint".into());
        args.push(out.join(format!("lin/chk_{k:06}.bin")).to_str().unwrap().into());
    }
    let o = Command::new(env!("CARGO_BIN_EXE_acmhd")).args(&args).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("d/lin/wave_residual.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "stride,spacing,pressure,potential");
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[2].is_finite() && cols[2] < 1.0);
    }
}

#[test]
fn diag_rejects_mismatched_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 8\nepsilon = 0.1\nT = 0.02\ndt = 0.01\n");
    let out = dir.path().join("out");
    assert_eq!(code(&acmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--checkpoints"])), 0);
    let other = config(dir.path(), "n = 16\nepsilon = 0.1\nT = 0.02\n");
    let chk = |k: u32| out.join(format!("run/chk_{k:06}.bin")).to_str().unwrap().to_string();
    let o = acmhd(&["diag", "--config", &other, "--checkpoint", &chk(0), "--checkpoint", &chk(1), "--checkpoint", &chk(2)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid size"));
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "n = 12\nepsilon = 0.1\nT = 1\n");
    let o = acmhd(&["run", "--config", &bad]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(code(&acmhd(&["run", "--config", "/nonexistent/cfg"])), 1);
    assert_eq!(code(&acmhd(&["bogus"])), 1);
    assert_eq!(code(&acmhd(&["run"])), 1);
    let good = config(dir.path(), "n = 8\nepsilon = 0.1\nT = 1\n");
    assert_eq!(code(&acmhd(&["sweep", "--config", &good, "--epsilons", "0.1,abc"])), 1);
    assert_eq!(code(&acmhd(&["--help"])), 0);
}

#[test]
fn instability_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 16\nepsilon = 0.1\nT = 2\ndt = 1\n");
    let out = dir.path().join("out");
    let o = acmhd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run/report.json")).unwrap()).unwrap();
    assert!(report["results"]["status"].as_str().unwrap().starts_with("aborted"));
}

#[test]
fn probe_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 16\nepsilon = 1\nT = 4\ndt = 0.1\n");
    let out = dir.path().join("out");
    let o = acmhd(&["probe", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("run/probe.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
}
