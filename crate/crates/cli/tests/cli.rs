use std::path::{Path, PathBuf};
use std::process::Command;

use rnls_cli::RunConfig;
use serde_json::Value;

fn canonical_text() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/canonical.ini")).unwrap()
}

/// Canonical config with `key = ...` lines replaced or appended in `section`.
fn edited(section: &str, key: &str, value: &str) -> String {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut done = false;
    for line in canonical_text().lines() {
        let t = line.trim();
        if t.starts_with('[') {
            if current == section && !done {
                out.push(format!("{key} = {value}"));
                done = true;
            }
            current = t.trim_matches(|c| c == '[' || c == ']').to_string();
        }
        if current == section && t.split('=').next().map(str::trim) == Some(key) {
            out.push(format!("{key} = {value}"));
            done = true;
            continue;
        }
        out.push(line.to_string());
    }
    if !done {
        out.push(format!("[{section}]\n{key} = {value}"));
    }
    out.join("\n")
}

fn load_err(text: &str) -> String {
    format!("{:#}", RunConfig::parse(text).unwrap_err())
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.ini");
    std::fs::write(&p, text).unwrap();
    p
}

fn rnls(args: &[&str], config: &Path, out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rnls"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .unwrap()
}

#[test]
fn canonical_config_round_trips() {
    let cfg = RunConfig::parse(&canonical_text()).unwrap();
    assert_eq!(cfg.solver.centers, Vec::<Vec<f64>>::new());
    assert_eq!(cfg.cxi.spots, vec![vec![0.0], vec![1.0]]);
    let again = RunConfig::parse(&cfg.to_ini_string()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn multi_point_values_survive_the_ini_reader() {
    let cfg = RunConfig::parse(&edited("solver", "centers", "-1.5; 2")).unwrap();
    assert_eq!(cfg.solver.centers, vec![vec![-1.5], vec![2.0]]);
}

#[test]
fn schema_errors() {
    assert!(load_err(&edited("problem", "alpah", "0.4")).contains("unknown key \"alpah\""));
    assert!(load_err(&format!("{}\n[plots]\nx = 1\n", canonical_text())).contains("unknown section [plots]"));
    assert!(load_err(&edited("problem", "points", "400")).contains("odd"));
}

#[test]
fn hypothesis_errors_name_the_hypothesis() {
    assert!(load_err(&edited("coeffs", "a1", "0")).contains("(H2)"));
    assert!(load_err(&edited("scope", "rho0", "0")).contains("(H1)"));
    assert!(load_err(&edited("problem", "alpha", "0.6")).contains("n > 2α violated"));
    assert!(load_err(&edited("problem", "p", "9.5")).contains("p=9.5 violates 1<p<(n+2α)/(n−2α)=9"));
}

#[test]
fn solve_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &canonical_text());
    let out = dir.path().join("out");
    let o = rnls(&["solve"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["ground_state.rsfld", "solve.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let header = std::fs::read_to_string(out.join("solve.csv")).unwrap();
    assert!(header.starts_with("iter,quotient,level,grad_norm,step\n"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["command"], "solve");
    for key in ["config_echo", "verdicts", "timings", "results"] {
        assert!(!s[key].is_null(), "{key}");
    }

    // the echoed configuration reloads to the effective one
    let mut ini = String::new();
    for (section, keys) in s["config_echo"].as_object().unwrap() {
        ini.push_str(&format!("[{section}]\n"));
        for (k, v) in keys.as_object().unwrap() {
            ini.push_str(&format!("{k} = {}\n", v.as_str().unwrap()));
        }
    }
    let mut expected = RunConfig::parse(&canonical_text()).unwrap();
    expected.output.dir = out.clone();
    assert_eq!(RunConfig::parse(&ini).unwrap(), expected);
}

fn error_of(o: &std::process::Output) -> String {
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn oracle_with_one_rung_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &edited("oracle", "ladder", "20:801"));
    let o = rnls(&["oracle-d"], &cfg, &dir.path().join("out"));
    assert_eq!(error_of(&o), "refinement ladder must be strictly increasing");
}

#[test]
fn ascending_epsilons_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &edited("sweep", "epsilons", "0.25, 0.5, 1"));
    let o = rnls(&["sweep-eps"], &cfg, &dir.path().join("out"));
    assert_eq!(error_of(&o), "epsilon list must be descending");
}

#[test]
fn constant_coefficients_have_no_concentration_gap() {
    let text = edited("coeffs", "q", "constant").replace("q_center = 0\nq_center_value = 1\nq_inf = 2\nq_width = 1\n", "q_value = 1\n");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &text);
    let o = rnls(&["sweep-eps"], &cfg, &dir.path().join("out"));
    assert!(error_of(&o).contains("no strict concentration gap"));
}

#[test]
fn missing_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = rnls(&["solve"], &dir.path().join("absent.ini"), &dir.path().join("out"));
    assert!(error_of(&o).contains("cannot read config"));
}

#[test]
fn failing_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &edited("solver", "max_iters", "3"));
    let o = rnls(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}
