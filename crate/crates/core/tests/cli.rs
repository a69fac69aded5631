use ssmlab::io::{read_measure_csv, to_json, MatrixDoc, PathDoc};
use ssmlab::linalg::{from_real, C64};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssmlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssmlab")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SHARED: &str = r#"{"instance": {"seed": 7, "dim": 8, "arity": 2, "family": "shared_basis"}}"#;

#[test]
fn zero_perturbation_passes_with_empty_measures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.json", r#"{"instance": {"seed": 1, "dim": 4, "arity": 2, "family": "shared_basis", "scale": 0.0}}"#);
    let out = ssmlab(&["verify-krein", "--config", &cfg, "--out", "o", "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for j in 1..=2 {
        let text = fs::read_to_string(dir.path().join(format!("o/mu_{j}.csv"))).unwrap();
        assert_eq!(text, "lambda_1,lambda_2,re_weight,im_weight\n");
    }
}

#[test]
fn shared_basis_seed_seven_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", SHARED);
    for cmd in ["verify-krein", "verify-koplienko"] {
        let out = ssmlab(&[cmd, "--config", &cfg, "--out", "o"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let report = fs::read_to_string(dir.path().join("o/krein_report.json")).unwrap();
    assert!(report.contains("\"rel_residual\"") && report.contains("\"pass\": true"));
}

#[test]
fn non_commuting_instance_is_a_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    let x = from_real(2, &[0.0, 1.0, 1.0, 0.0]);
    let z = from_real(2, &[1.0, 0.0, 0.0, -1.0]);
    let doc = PathDoc {
        base: vec![MatrixDoc::from_matrix(&x), MatrixDoc::from_matrix(&z)],
        direction: vec![MatrixDoc::from_matrix(&(z.clone() * C64::from(0.0))), MatrixDoc::from_matrix(&(z * C64::from(0.0)))],
    };
    write(dir.path(), "path.json", &to_json(&doc).unwrap());
    let cfg = write(dir.path(), "c.json", r#"{"path_file": "path.json"}"#);
    let out = ssmlab(&["verify-krein", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not commuting"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ssmlab(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(ssmlab(&["verify-krein", "--config", "missing.json"], dir.path()).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"instance": {"seed": 1}}"#);
    assert_eq!(ssmlab(&["verify-krein", "--config", &bad], dir.path()).status.code(), Some(2));
    let cfg = write(dir.path(), "k.json", SHARED);
    assert_eq!(ssmlab(&["verify-krein", "--config", &cfg, "--tol", "-1"], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_verification_exits_one_and_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", SHARED);
    let out = ssmlab(&["verify-krein", "--config", &cfg, "--out", "o", "--tol", "1e-300", "--quad-q", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("o/krein_report.json").is_file());
}

#[test]
fn compute_ssm_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.json", SHARED);
    let out = ssmlab(&["compute-ssm", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let spec: ssmlab::generators::InstanceSpec =
        serde_json::from_str(r#"{"seed": 7, "dim": 8, "arity": 2, "family": "shared_basis"}"#).unwrap();
    let path = ssmlab::generators::gen(&spec).unwrap().hermitian().unwrap();
    let fresh = ssmlab::ssm::krein_ssm(&path, 16).unwrap();
    let g = |x: &[f64]| C64::new((x[0] - 0.3 * x[1]).cos(), x[0] * x[1]);
    for j in 0..2 {
        let read = read_measure_csv(fs::File::open(dir.path().join(format!("o/mu_{}.csv", j + 1))).unwrap()).unwrap();
        assert_eq!(read.integrate(g), fresh.quadrature[j].integrate(g));
    }
    let report = fs::read_to_string(dir.path().join("o/ssm_report.json")).unwrap();
    assert!(report.contains("measure_total_variation[2]"));
}

#[test]
fn dissipative_hardy_instance_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.json", r#"{"instance": {"seed": 3, "dim": 8, "arity": 2, "family": "hardy_dissipative", "scale": 0.1, "scalar_direction": true}}"#);
    let out = ssmlab(&["verify-dissipative", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("o/dissipative_koplienko_report.json").is_file());
}

#[test]
fn empty_suite_passes_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.json", r#"{"suite": {"seed": 1, "criteria": []}}"#);
    assert_eq!(ssmlab(&["suite", "--config", &empty, "--out", "e"], dir.path()).status.code(), Some(0));
    let small = write(dir.path(), "s.json", r#"{"suite": {"seed": 5, "size": 0.05, "criteria": [1, 3, 5]}}"#);
    let read_all = |d: &Path| {
        let mut files: Vec<_> = fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.into_iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    assert_eq!(ssmlab(&["suite", "--config", &small, "--out", "s"], dir.path()).status.code(), Some(0));
    let first = read_all(&dir.path().join("s"));
    assert_eq!(ssmlab(&["suite", "--config", &small, "--out", "s"], dir.path()).status.code(), Some(0));
    assert_eq!(first, read_all(&dir.path().join("s")));
    assert!(first.iter().any(|(n, _)| n.to_string_lossy() == "summary.json"));
}
