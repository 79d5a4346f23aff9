use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const ELLIPSE: &str = r#"{"type":"ellipse","a":2,"b":1}"#;
const CIRCLE: &str = r#"{"type":"ellipse","a":1,"b":1}"#;
const MODE6: &str = r#"{"type":"profile","R":1,"d_modes":[[2,0.1,0],[6,0.015,0]]}"#;
const ASYMMETRIC: &str = r#"{"type":"fourier","c0":1,"cos":[0.1,0.05,0.02],"sin":[0,0.03]}"#;

fn billiard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(args)
        .env_remove("BILLIARD_THREADS")
        .output()
        .expect("spawn billiard")
}

fn table(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, json).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// Numeric rows of an orbit CSV, skipping the header and comment lines.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn validate_ellipse_passes() {
    let dir = TempDir::new().unwrap();
    let out = billiard(&["table", "validate", s(&table(&dir, "e.json", ELLIPSE))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["positive_curvature"], true);
    assert_eq!(v["centrally_symmetric"], true);
}

#[test]
fn validate_rejects_negative_curvature() {
    let dir = TempDir::new().unwrap();
    let path = table(
        &dir,
        "f.json",
        r#"{"type":"fourier","c0":1,"cos":[0,0.9],"sin":[]}"#,
    );
    let out = billiard(&["table", "validate", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["positive_curvature"], false);
    // ρ(0) = 1 − 3·0.9
    assert!((v["min_rho"].as_f64().unwrap() + 1.7).abs() < 1e-12);
}

#[test]
fn validate_rejects_inadmissible_mode() {
    let dir = TempDir::new().unwrap();
    let path = table(
        &dir,
        "p.json",
        r#"{"type":"profile","R":1,"d_modes":[[3,0.1,0]]}"#,
    );
    let out = billiard(&["table", "validate", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["admissible_modes"], false);
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = table(&dir, "bad.json", r#"{"type":"circle"}"#);
    assert_eq!(
        billiard(&["table", "validate", s(&bad)]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(billiard(&["verify", s(&missing)]).status.code(), Some(2));
    let e = table(&dir, "e.json", ELLIPSE);
    assert_eq!(
        billiard(&["verify", s(&e), "--suite", "nope"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn circle_square_orbit() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("t.csv");
    let delta = FRAC_PI_4.to_string();
    let out = billiard(&[
        "orbit",
        s(&table(&dir, "c.json", CIRCLE)),
        "--psi0",
        "0",
        "--delta0",
        &delta,
        "--steps",
        "4",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("step,psi,delta,p,phi,x,y\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 5);
    let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)];
    for (row, (x, y)) in r.iter().zip(expected) {
        assert!(
            (row[5] - x).abs() < 1e-12 && (row[6] - y).abs() < 1e-12,
            "{row:?}"
        );
    }
}

#[test]
fn ellipse_four_periodic_orbit_closes() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("t.csv");
    // on the 4-periodic curve of the ellipse: cos 2d = A cos 2ψ, A = (b² − a²)/(a² + b²)
    let psi: f64 = 0.3;
    let delta = 0.5 * (-0.6 * (2.0 * psi).cos()).acos();
    let (psi_s, delta_s) = (psi.to_string(), delta.to_string());
    let e = table(&dir, "e.json", ELLIPSE);
    let args = [
        "orbit",
        s(&e),
        "--psi0",
        &psi_s,
        "--delta0",
        &delta_s,
        "--steps",
        "4",
        "--out",
        s(&out_path),
    ];
    assert_eq!(billiard(&args).status.code(), Some(0));
    let r = rows(&fs::read_to_string(&out_path).unwrap());
    assert!(
        (r[4][5] - r[0][5]).abs() < 1e-9 && (r[4][6] - r[0][6]).abs() < 1e-9,
        "{:?} {:?}",
        r[0],
        r[4]
    );
}

#[test]
fn ellipse_orbit_reports_caustic_drift() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("t.csv");
    let e = table(&dir, "e.json", ELLIPSE);
    let args = [
        "orbit",
        s(&e),
        "--psi0",
        "0.3",
        "--delta0",
        "0.7",
        "--steps",
        "1000",
        "--out",
        s(&out_path),
    ];
    assert_eq!(billiard(&args).status.code(), Some(0));
    let csv = fs::read_to_string(&out_path).unwrap();
    let footer = csv.lines().last().unwrap();
    let drift: f64 = footer
        .strip_prefix("# lambda_drift=")
        .expect(footer)
        .parse()
        .unwrap();
    assert!(drift <= 1e-8, "{drift}");
    assert_eq!(rows(&csv).len(), 1001);
    // independent recomputation of λ = a²cos²φ + b²sin²φ − p² from the written rows
    let lambda = |r: &Vec<f64>| 4.0 * r[4].cos().powi(2) + r[4].sin().powi(2) - r[3] * r[3];
    let r = rows(&csv);
    let l0 = lambda(&r[0]);
    assert!(r.iter().all(|row| (lambda(row) - l0).abs() <= 1e-8));
}

#[test]
fn orbit_output_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = table(&dir, "m.json", MODE6);
    let run = |name: &str| {
        let out_path = dir.path().join(name);
        let args = [
            "orbit",
            s(&spec),
            "--psi0",
            "1.1",
            "--delta0",
            "0.4",
            "--steps",
            "500",
            "--out",
            s(&out_path),
        ];
        assert_eq!(billiard(&args).status.code(), Some(0));
        fs::read(out_path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn grazing_start_exits_3() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("t.csv");
    let e = table(&dir, "e.json", ELLIPSE);
    let args = [
        "orbit",
        s(&e),
        "--psi0",
        "0",
        "--delta0",
        "0",
        "--steps",
        "3",
        "--out",
        s(&out_path),
    ];
    let out = billiard(&args);
    assert_eq!(out.status.code(), Some(3));
    // partial output: the header is still written
    assert!(fs::read_to_string(&out_path).unwrap().starts_with("step,"));
}

#[test]
fn verify_ellipse_all_passes() {
    let dir = TempDir::new().unwrap();
    let out = billiard(&[
        "verify",
        s(&table(&dir, "e.json", ELLIPSE)),
        "--suite",
        "all",
        "--grid",
        "256",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v = json(&out);
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["check"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["twist", "symplectic", "poncelet", "orthoptic", "relations"]
    );
}

#[test]
fn verify_mode6_poncelet_passes() {
    let dir = TempDir::new().unwrap();
    let out = billiard(&[
        "verify",
        s(&table(&dir, "m.json", MODE6)),
        "--suite",
        "poncelet",
        "--grid",
        "128",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)[0]["pass"], true);
}

#[test]
fn verify_asymmetric_orthoptic_fails_with_report() {
    let dir = TempDir::new().unwrap();
    let out = billiard(&[
        "verify",
        s(&table(&dir, "f.json", ASYMMETRIC)),
        "--suite",
        "orthoptic",
        "--grid",
        "256",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v[0]["pass"], false);
    assert!(v[0]["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn integral_ellipse_and_mode6() {
    let dir = TempDir::new().unwrap();
    let out = billiard(&["integral", s(&table(&dir, "e.json", ELLIPSE)), "--n", "512"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["I_P"].as_f64().unwrap().abs() <= 1e-8 * 25.0);
    assert!(v["convergence_delta"].is_number());
    let out = billiard(&["integral", s(&table(&dir, "m.json", MODE6)), "--n", "512"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["I_P"].as_f64().unwrap() > 0.0);
}

#[test]
fn integral_on_fourier_exits_4() {
    let dir = TempDir::new().unwrap();
    let f = table(
        &dir,
        "f.json",
        r#"{"type":"fourier","c0":1,"cos":[0,0.05],"sin":[0,0.02]}"#,
    );
    assert_eq!(billiard(&["integral", s(&f)]).status.code(), Some(4));
}

#[test]
fn beam_scan_is_reproducible_and_records_seed() {
    let dir = TempDir::new().unwrap();
    let spec = table(&dir, "m.json", MODE6);
    let run = |threads: &str| {
        let out_path = dir.path().join(format!("scan{threads}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_billiard"))
            .args([
                "beam-scan",
                s(&spec),
                "--starts",
                "16",
                "--max-steps",
                "200",
                "--seed",
                "7",
                "--out",
                s(&out_path),
            ])
            .env("BILLIARD_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        fs::read(out_path).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    let v: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["starts"], 16);
    assert_eq!(v["table"]["type"], "profile");
}

#[test]
fn beam_scan_circle_has_no_detections() {
    let dir = TempDir::new().unwrap();
    let out = billiard(&[
        "beam-scan",
        s(&table(&dir, "c.json", CIRCLE)),
        "--starts",
        "32",
        "--max-steps",
        "500",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["detections"].as_array().unwrap().len(), 0);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn bad_thread_count_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args([
            "verify",
            s(&table(&dir, "e.json", ELLIPSE)),
            "--suite",
            "twist",
            "--grid",
            "16",
        ])
        .env("BILLIARD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn archived_reference_scan_is_reproduced() {
    let reference = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../reference");
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("scan.json");
    let spec = reference.join("profile_mode6.json");
    let args = [
        "beam-scan",
        s(&spec),
        "--starts",
        "256",
        "--max-steps",
        "10000",
        "--seed",
        "42",
        "--out",
        s(&out_path),
    ];
    assert_eq!(billiard(&args).status.code(), Some(0));
    let archived = fs::read(reference.join("beam_scan_profile_mode6.json")).unwrap();
    assert_eq!(fs::read(&out_path).unwrap(), archived);
    let v: serde_json::Value = serde_json::from_slice(&archived).unwrap();
    assert!(!v["detections"].as_array().unwrap().is_empty());
}
