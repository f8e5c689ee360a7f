use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hofmat::config::config_hash;

fn hofmat(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hofmat"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove("HOFMAT_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Data rows of a CSV written by the binary, hash and header checked.
fn rows(path: &Path, config_text: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_sha256={}", config_hash(config_text)));
    assert!(lines.next().unwrap().contains(','));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const HARPER_SMALL: &str = r#"{
  "symbol": {"name": "harper"},
  "path": "peierls",
  "b_max": 6.283185307179586,
  "b_grid": [0.0, 6.283185307179586],
  "truncation": {"lattice_radius": 4, "band_cut": 1, "fourier_cutoff": 0, "space_quad": 4}
}"#;

#[test]
fn butterfly_is_periodic_in_the_plaquette_flux() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", HARPER_SMALL);
    let out = dir.path().join("out");
    let o = hofmat(&["butterfly"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("butterfly.csv"), HARPER_SMALL);
    let n = r.len() / 2;
    let at0: Vec<f64> = r[..n].iter().map(|x| x[2].parse().unwrap()).collect();
    let at2pi: Vec<f64> = r[n..].iter().map(|x| x[2].parse().unwrap()).collect();
    for (a, b) in at0.iter().zip(&at2pi) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    // Bipartite hopping: the free spectrum is symmetric about 0.
    for (a, b) in at0.iter().zip(at0.iter().rev()) {
        assert!((a + b).abs() < 1e-10);
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let typo = write_config(dir.path(), "t.json", r#"{"symbol": {"name": "harper"}, "b_max": 1, "b_grid": [0], "seeed": 1}"#);
    let o = hofmat(&["butterfly"], &typo, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeed"));
    let empty = write_config(dir.path(), "e.json", r#"{"symbol": {"name": "harper"}, "b_max": 1, "b_grid": []}"#);
    assert_eq!(hofmat(&["butterfly"], &empty, &out).status.code(), Some(2));
    let harper = write_config(dir.path(), "h.json", HARPER_SMALL);
    assert_eq!(hofmat(&["oracle-check"], &harper, &out).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_hofmat")).arg("spectrum").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_hofmat"))
        .args(["spectrum", "--config"])
        .arg(&harper)
        .arg("--out")
        .arg(&out)
        .env("HOFMAT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn closed_gap_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "symbol": {"name": "harper"}, "path": "peierls", "b_max": 1, "b_grid": [0.0, 0.1],
      "truncation": {"lattice_radius": 3, "band_cut": 1, "fourier_cutoff": 0, "space_quad": 4},
      "gap": {"window": [-1.0, 1.0], "min_width": 1.5}
    }"#;
    let cfg = write_config(dir.path(), "c.json", text);
    let out = dir.path().join("out");
    assert_eq!(hofmat(&["edges"], &cfg, &out).status.code(), Some(0));
    let r = rows(&out.join("edges.csv"), text);
    assert!(r.iter().all(|row| row[3] == "closed"));
    let q = rows(&out.join("edge_quotients.csv"), text);
    assert_eq!(q[0][4], "closed");
}

#[test]
fn chain_at_zero_increment_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "symbol": {"name": "harper"}, "b_max": 2, "b0": 1.0, "delta_b": [0.0],
      "truncation": {"lattice_radius": 2, "band_cut": 1, "fourier_cutoff": 0, "space_quad": 4}
    }"#;
    let cfg = write_config(dir.path(), "c.json", text);
    let out = dir.path().join("out");
    assert_eq!(hofmat(&["chain"], &cfg, &out).status.code(), Some(0));
    let r = rows(&out.join("chain.csv"), text);
    assert_eq!(r.len(), 1);
    assert!(r[0][1..].iter().all(|v| v == "0"));
}

const VERIFY_SMALL: &str = r#"{
  "symbol": {"name": "gaussian_xi"}, "b_max": 1, "b_grid": [0.0, 0.3],
  "truncation": {"lattice_radius": 1, "band_cut": 2, "fourier_cutoff": 1, "space_quad": 6},
  "epsilons": [0.2, 0.1]
}"#;

#[test]
fn verify_passes_and_the_corruption_hook_fails_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", VERIFY_SMALL);
    let out = dir.path().join("ok");
    let o = hofmat(&["verify"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&out.join("epsilon_convergence.csv"), VERIFY_SMALL).len(), 2);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);

    let corrupt = VERIFY_SMALL.replacen('{', "{\"test_corrupt_block\": true,", 1);
    let cfg = write_config(dir.path(), "bad.json", &corrupt);
    let out = dir.path().join("bad");
    let o = hofmat(&["verify"], &cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL hermiticity"));
}

#[test]
fn assemble_reuses_its_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", VERIFY_SMALL);
    let out = dir.path().join("out");
    let read_summary = || -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
    };
    assert_eq!(hofmat(&["assemble"], &cfg, &out).status.code(), Some(0));
    assert_eq!(read_summary()["results"]["from_cache"], false);
    let first = std::fs::read(out.join("band_profile.csv")).unwrap();
    assert_eq!(hofmat(&["assemble"], &cfg, &out).status.code(), Some(0));
    assert_eq!(read_summary()["results"]["from_cache"], true);
    assert_eq!(std::fs::read(out.join("band_profile.csv")).unwrap(), first);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", VERIFY_SMALL);
    let out = dir.path().join("out");
    assert_eq!(hofmat(&["spectrum", "--seed", "42"], &cfg, &out).status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 42);
}
