use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn orbitflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitflow")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

/// Runs a config and returns the run directory it reports.
fn run_ok(tmp: &TempDir, name: &str, cfg: &Value, extra: &[&str]) -> PathBuf {
    let path = write_config(tmp.path(), name, cfg);
    let out = tmp.path().join("runs");
    let mut args = vec!["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = orbitflow(&args);
    assert!(o.status.success(), "run failed: {}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = match stdout.lines().find(|l| l.starts_with("run directory:")) {
        Some(l) => l.trim_start_matches("run directory:").trim(),
        None => stdout.trim(),
    };
    PathBuf::from(line)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn metric(m: &Value, name: &str) -> f64 {
    m["metrics"][name].as_f64().unwrap_or_else(|| panic!("metric {name} missing"))
}

fn compare(a: &Path, b: &Path) -> Value {
    let o = orbitflow(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success(), "compare failed: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn so3_geodesic(epsilon: f64, h: f64, t_end: f64, project_every: usize) -> Value {
    json!({
        "kind": "geodesic",
        "algebra": {"family": "so", "n": 3},
        "seed_a": [0, 0, 1],
        "epsilon": epsilon,
        "integrator": {"h": h, "t_end": t_end, "project_every": project_every},
        "seed": 3
    })
}

fn su3_certify() -> Value {
    json!({
        "kind": "certify",
        "algebra": {"family": "su", "n": 3},
        "seed_a": [1.0, 0.5, 0, 0, 0, 0, 0, 0],
        "epsilon": 0.7,
        "b": [0.3, -0.8, 0, 0, 0, 0, 0, 0],
        "samples": 20
    })
}

#[test]
fn empty_config_lists_every_missing_field() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "empty.json", &json!({}));
    let o = orbitflow(&["run", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    for field in ["kind", "algebra", "seed_a"] {
        assert!(err.contains(&format!("- {field}: missing field")), "{field} not listed in:\n{err}");
    }
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1, "no run directory is created for an invalid config");
}

#[test]
fn kind_specific_fields_are_listed_with_paths() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({"kind": "lax", "algebra": {"family": "su", "n": 3}, "seed_a": [1, 0.5, 0, 0, 0, 0, 0, 0], "integrator": {"h": 0.01}});
    let path = write_config(tmp.path(), "lax.json", &cfg);
    let o = orbitflow(&["run", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    for field in ["epsilon", "b", "integrator.t_end"] {
        assert!(err.contains(&format!("- {field}: missing field")), "{field} not listed in:\n{err}");
    }
    assert!(!err.contains("integrator.h:"));
}

#[test]
fn nonpositive_step_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "bad.json", &so3_geodesic(1.0, 0.0, 1.0, 0));
    let o = orbitflow(&["run", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("integrator.h: must be positive"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.json");
    let o = orbitflow(&["run", "--config", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn divergence_is_a_numerical_error_with_step_index() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "kind": "pendulum",
        "algebra": {"family": "su", "n": 3},
        "seed_a": [1.0, 0.5, 0, 0, 0, 0, 0, 0],
        "epsilon": 0.7,
        "b": [0.3, -0.8, 0, 0, 0, 0, 0, 0],
        "integrator": {"h": 0.8, "t_end": 40.0, "project_every": 0}
    });
    let path = write_config(tmp.path(), "div.json", &cfg);
    let o = orbitflow(&["run", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged at step"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(orbitflow(&["run"]).status.code(), Some(1));
    assert_eq!(orbitflow(&["frobnicate"]).status.code(), Some(1));
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "g.json", &so3_geodesic(1.0, 0.1, 1.0, 0));
    let o = orbitflow(&["--threads", "0", "run", "--config", path.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn certify_su3_is_complete() {
    let tmp = TempDir::new().unwrap();
    let dir = run_ok(&tmp, "cert.json", &su3_certify(), &[]);
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.join("completeness.json")).unwrap()).unwrap();
    let report = &doc["report"];
    assert_eq!(report["verdict"], json!(true));
    // dim T*O(a) = 2 (dim su(3) − rank) = 12, split evenly by ddim and dind.
    assert_eq!(report["phase_dim"], json!(12));
    assert_eq!(report["ddim"].as_u64().unwrap() + report["dind"].as_u64().unwrap(), 12);
    let m = manifest(&dir);
    assert_eq!(doc["config_hash"], m["config_hash"]);
    assert_eq!(metric(&m, "verdict"), 1.0);
    assert_eq!(metric(&m, "a1_holds"), 1.0);
    assert_eq!(metric(&m, "a2_holds"), 1.0);
}

#[test]
fn radius_scan_matches_arctan_formula() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "kind": "radius_scan",
        "algebra": {"family": "so", "n": 3},
        "seed_a": [0, 0, 1],
        "epsilons": [0.5, 1.0, 2.0],
        "integrator": {"h": 0.005, "t_end": 7.0, "project_every": 10}
    });
    let dir = run_ok(&tmp, "rs.json", &cfg, &[]);
    let text = fs::read_to_string(dir.join("radius_scan.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "epsilon,measured,expected,abs_error");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for (row, eps) in rows.iter().zip([0.5_f64, 1.0, 2.0]) {
        assert_eq!(row[0], eps);
        let expected = (1.0 / eps).atan();
        assert!((row[1] - expected).abs() < 1e-6, "ε = {eps}: measured {} vs {expected}", row[1]);
    }
}

#[test]
fn identical_configs_give_identical_outputs_and_empty_diff() {
    let tmp = TempDir::new().unwrap();
    let cfg = so3_geodesic(1.0, 0.01, 3.0, 10);
    let a = run_ok(&tmp, "a.json", &cfg, &[]);
    let b = run_ok(&tmp, "b.json", &cfg, &["--threads", "1"]);
    assert_ne!(a, b, "a second run must not overwrite the first");
    assert!(b.file_name().unwrap().to_str().unwrap().ends_with("-1"));
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["files"], mb["files"]);
    for f in ma["files"].as_array().unwrap() {
        let name = f["path"].as_str().unwrap();
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    let diff = compare(&a, &b);
    assert_eq!(diff["differences"], json!([]));
}

#[test]
fn manifest_hashes_every_output_file() {
    let tmp = TempDir::new().unwrap();
    let dir = run_ok(&tmp, "cert.json", &su3_certify(), &["--quiet"]);
    let m = manifest(&dir);
    let hash = m["config_hash"].as_str().unwrap();
    assert!(dir.file_name().unwrap().to_str().unwrap().ends_with(&hash[..12]));
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len() + 1, fs::read_dir(&dir).unwrap().count());
    for f in files {
        let bytes = fs::read(dir.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert!(String::from_utf8(bytes).unwrap().contains(hash), "{} lacks the config hash", f["path"]);
    }
    for key in ["rank_tol", "kernel_tol", "divergence_tol"] {
        assert!(m["tolerances"][key].is_f64());
    }
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["version"], json!(env!("CARGO_PKG_VERSION")));
}

#[test]
fn config_hash_ignores_key_order_and_output_dir() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = so3_geodesic(0.5, 0.05, 1.0, 0);
    let a = run_ok(&tmp, "a.json", &cfg, &["--quiet"]);
    cfg["output_dir"] = json!("elsewhere");
    let b = run_ok(&tmp, "b.json", &cfg, &["--quiet"]);
    assert_eq!(manifest(&a)["config_hash"], manifest(&b)["config_hash"]);
}

#[test]
fn halving_the_step_divides_terminal_error_by_sixteen() {
    let tmp = TempDir::new().unwrap();
    let coarse = run_ok(&tmp, "coarse.json", &so3_geodesic(0.8, 0.04, 3.0, 0), &[]);
    let fine = run_ok(&tmp, "fine.json", &so3_geodesic(0.8, 0.02, 3.0, 0), &[]);
    let diff = compare(&coarse, &fine);
    let ratio = diff["terminal_error_ratio"].as_f64().unwrap();
    assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    assert!(diff["differences"].as_array().unwrap().iter().any(|d| d["metric"] == "terminal_error"));
}

#[test]
fn geodesic_radius_difference_between_eps_zero_and_one() {
    let tmp = TempDir::new().unwrap();
    let great = run_ok(&tmp, "e0.json", &so3_geodesic(0.0, 0.01, 7.0, 10), &[]);
    let small = run_ok(&tmp, "e1.json", &so3_geodesic(1.0, 0.01, 7.0, 10), &[]);
    let diff = compare(&great, &small);
    let d = diff["radius_difference"].as_f64().unwrap();
    assert!((d - (PI / 2.0 - PI / 4.0)).abs() < 1e-6, "radius difference {d}");
}

#[test]
fn incompatible_kinds_are_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let geo = run_ok(&tmp, "g.json", &so3_geodesic(1.0, 0.05, 1.0, 0), &["--quiet"]);
    let cert = run_ok(&tmp, "c.json", &su3_certify(), &["--quiet"]);
    let o = orbitflow(&["compare", geo.join("manifest.json").to_str().unwrap(), cert.join("manifest.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot compare"));
}

#[test]
fn every_kind_runs_and_conserves() {
    let tmp = TempDir::new().unwrap();
    let base = json!({
        "algebra": {"family": "su", "n": 3},
        "seed_a": [1.0, 0.5, 0, 0, 0, 0, 0, 0],
        "epsilon": 0.7,
        "b": [0.3, -0.8, 0, 0, 0, 0, 0, 0],
        "integrator": {"h": 0.005, "t_end": 2.0, "project_every": 10}
    });
    for kind in ["pendulum", "semidirect", "lax"] {
        let mut cfg = base.clone();
        cfg["kind"] = json!(kind);
        let dir = run_ok(&tmp, &format!("{kind}.json"), &cfg, &["--quiet"]);
        let m = manifest(&dir);
        assert!(metric(&m, "energy_drift_rel") < 1e-8, "{kind}: {}", m["metrics"]);
        let header = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
        assert!(header.lines().nth(1).unwrap().starts_with("t,"));
        match kind {
            "lax" => assert!(metric(&m, "max_spectral_drift") < 1e-8),
            _ => assert!(metric(&m, "family_drift_max_rel") < 1e-8),
        }
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path).unwrap();
            orbitflow_cli::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
