use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bfb(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfb")).args(args).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

fn setup(config: &str) -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    (dir, cfg, out)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn manifest_matches_directory(out: &Path) {
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let listed: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    let mut on_disk: Vec<String> =
        std::fs::read_dir(out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    on_disk.sort();
    assert_eq!(listed, on_disk);
}

#[test]
fn solve_baseline_matches_closed_form() {
    let (_d, cfg, out) = setup(r#"{"mesh": {"n_r": 16, "n_theta": 64}}"#);
    let o = bfb(&["solve"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let j = r["cost"]["j"].as_f64().unwrap();
    let exact = r["radial_oracle"]["j_exact"].as_f64().unwrap();
    assert!(r["radial_oracle"]["j_relative_error"].as_f64().unwrap() < 5e-3);
    assert!((j - exact).abs() < 5e-3 * exact, "{j} vs {exact}");
    for f in ["report.json", "neumann.csv", "robin.csv", "mesh.txt", "domain.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("robin.csv")).unwrap();
    assert!(csv.starts_with("node_index,x,y,u\n"));
    assert_eq!(csv.lines().count(), 1 + 17 * 64);
    manifest_matches_directory(&out);
}

#[test]
fn audit_baseline_passes() {
    let (_d, cfg, out) = setup(r#"{"mesh": {"n_r": 8, "n_theta": 64}, "audit": {"certification_samples": 200}}"#);
    let o = bfb(&["audit", "--quiet"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = report(&out);
    assert_eq!(r["passed"], Value::Bool(true));
    for link in r["chain"]["links"].as_array().unwrap() {
        if link["informational"] == Value::Bool(false) {
            assert!(link["relative_slack"].as_f64().unwrap() >= 0.0, "{link}");
        }
    }
    let u = r["chain"]["u_h1"].as_f64().unwrap();
    assert!(u < r["chain"]["bound_u"].as_f64().unwrap());
    assert!(r["witness"]["scale"].as_f64().unwrap() <= 1e4);
    let chain = std::fs::read_to_string(out.join("chain.csv")).unwrap();
    assert!(chain.starts_with("link,lhs,rhs,relative_slack,informational,c1,c2,c3,c\n"));
    manifest_matches_directory(&out);
}

#[test]
fn negative_beta_is_a_config_error_without_outputs() {
    let (_d, cfg, out) = setup(r#"{"physics": {"beta": -1.0}}"#);
    let o = bfb(&["solve"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
}

#[test]
fn config_errors_exit_with_two() {
    for text in [r#"{"physics": {"lambda": 1.0, "mu": 2.0}}"#, "not json", r#"{"domain": {"fourier": [[1.05, 0.0]]}}"#] {
        let (_d, cfg, out) = setup(text);
        assert_eq!(bfb(&["pf"], &cfg, &out).status.code(), Some(2), "{text}");
        assert!(!out.exists());
    }
    let dir = tempfile::tempdir().unwrap();
    let o = bfb(&["solve"], &dir.path().join("missing.json"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_three() {
    let (_d, cfg, out) = setup(r#"{"solver": {"max_iters": 1}}"#);
    assert_eq!(bfb(&["solve"], &cfg, &out).status.code(), Some(3));
}

#[test]
fn output_dir_may_come_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-config");
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, serde_json::json!({"mesh": {"n_r": 4, "n_theta": 32}, "output_dir": out}).to_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bfb")).args(["solve", "--quiet", "--config"]).arg(&cfg).output().unwrap();
    assert!(o.status.success());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn optimize_writes_trajectory_and_plots() {
    let (_d, cfg, out) = setup(r#"{"domain": {"fourier": [[3.2, 0.0]]}, "mesh": {"n_r": 8, "n_theta": 32}}"#);
    let o = bfb(&["optimize"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(r["final"]["j"].as_f64().unwrap() < r["initial"]["j"].as_f64().unwrap());
    assert!(r["c0_relative_error"].as_f64().unwrap() < 0.02);
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("iteration,accepted,j,measure,c0\n"));
    assert!(std::fs::read_to_string(out.join("boundary.svg")).unwrap().contains("<polygon"));
    manifest_matches_directory(&out);
}

#[test]
fn convergence_and_survey_tables() {
    let (_d, cfg, out) = setup(
        r#"{"convergence": {"levels": [16, 32, 64]}, "mesh": {"n_r": 4, "n_theta": 32},
            "survey": {"family": "concentric"}, "audit": {"certification_samples": 50}}"#,
    );
    assert!(bfb(&["convergence", "--quiet"], &cfg, &out).status.success());
    let rows = report(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    let ratio = rows[2]["robin_l2_ratio"].as_f64().unwrap();
    assert!((3.5..4.5).contains(&ratio));
    assert!(std::fs::read_to_string(out.join("convergence.svg")).unwrap().contains("<polyline"));

    let out2 = out.with_file_name("survey");
    assert!(bfb(&["survey", "--quiet"], &cfg, &out2).status.success());
    let r = report(&out2);
    assert_eq!(r["rows"].as_array().unwrap().len(), 4);
    assert_eq!(r["bounded"], Value::Bool(true));
    let csv = std::fs::read_to_string(out2.join("survey.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    manifest_matches_directory(&out2);
}
