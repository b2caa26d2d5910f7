use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mtf(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtf"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const COARSE: &str = "problem = disk\nr_outer = 1.5\nh = 0.2\nrecord_timings = false\n";

#[test]
fn mesh_reports_one_interior_cross_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COARSE);
    let out = mtf(&["mesh", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("partition.json")).unwrap()).unwrap();
    assert_eq!(report["interior_cross_points"], 1);
    assert_eq!(report["cross_points"], 4);
    assert!(dir.path().join("mesh.mtf").exists());

    // the written mesh can be fed back in
    let mesh = dir.path().join("mesh.mtf");
    let again = mtf(&["mesh", "--config", &cfg, "--set", &format!("mesh={}", mesh.display())], &dir.path().join("again"));
    assert!(again.status.success());
}

#[test]
fn solve_writes_a_deterministic_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COARSE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = mtf(&["solve", "--config", &cfg, "--beta", "0.4", "--omega", "2.5", "--gamma", "0.4", "--seed", "7"], out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let report = fs::read_to_string(a.join("report.json")).unwrap();
    assert_eq!(report, fs::read_to_string(b.join("report.json")).unwrap());
    assert_eq!(fs::read(a.join("solution.csv")).unwrap(), fs::read(b.join("solution.csv")).unwrap());

    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["alpha_est", "config", "iterations", "residuals", "timings", "version"]);
    assert_eq!(json["config"]["beta"], 0.4);
    assert_eq!(json["config"]["omega"], 2.5);
    assert_eq!(json["config"]["gamma"], 0.4);
    assert_eq!(json["iterations"]["converged"], true);
    assert!(json["residuals"]["oracle_rel_l2"].as_f64().unwrap() <= 1e-6);
    assert!(json["alpha_est"].as_f64().unwrap() > 0.0);

    let csv = fs::read_to_string(a.join("solution.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "vertex,re_u,im_u");
}

#[test]
fn gmres_solves_the_split_square() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem = square\ncells = 16\nform = difference\n");
    let o = mtf(&["solve", "--config", &cfg, "--solver", "gmres"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["iterations"]["solver"], "gmres");
    assert!(json["residuals"]["oracle_rel_l2"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn verify_passes_and_catches_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), COARSE);
    let ok = mtf(&["verify", "--config", &cfg, "--set", "probes=4"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = mtf(&["verify", "--config", &cfg, "--set", "probes=4", "--set", "corrupt_restriction=1:3"], dir.path());
    assert_eq!(bad.status.code(), Some(3));
    let table = String::from_utf8_lossy(&bad.stdout);
    let failing: Vec<&str> = table.lines().filter(|l| l.ends_with("FAIL")).collect();
    assert!(failing.iter().any(|l| l.starts_with("polarity")), "{table}");
    assert!(failing.iter().any(|l| l.starts_with("single traces fixed by Π")), "{table}");
}

#[test]
fn study_tabulates_a_beta_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{COARSE}tol = 1e-6\n"));
    let o = mtf(&["study", "--config", &cfg, "--ladder", "beta=0.3,0.5,0.7"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("parameter,value,iterations"));
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let f: Vec<&str> = row.split(',').collect();
        let (contraction, bound): (f64, f64) = (f[5].parse().unwrap(), f[6].parse().unwrap());
        assert!(contraction <= bound + 1e-6);
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mtf(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(mtf(&["solve", "--beta", "1.5"], dir.path()).status.code(), Some(1));
    let cfg = write_config(dir.path(), "no_such_key = 3\n");
    assert_eq!(mtf(&["solve", "--config", &cfg], dir.path()).status.code(), Some(1));
    let cfg = write_config(dir.path(), &format!("{COARSE}maxit = 2\n"));
    assert_eq!(mtf(&["solve", "--config", &cfg], dir.path()).status.code(), Some(2));
}
