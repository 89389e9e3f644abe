use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fuchsia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuchsia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn diag(entries: &[f64]) -> Value {
    let n = entries.len();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| json!([if i == j { entries[i] } else { 0.0 }, 0.0]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Diagonal residues at 0, 1 and -1+i.
fn commuting_system() -> Value {
    json!({
        "dimension": 2,
        "poles": [[0.0, 0.0], [1.0, 0.0], [-1.0, 1.0]],
        "residues": [diag(&[0.2, -0.1]), diag(&[-0.3, 0.25]), diag(&[0.1, -0.15])],
    })
}

/// Non-commuting residues of norm about 0.05.
fn small_system() -> Value {
    json!({
        "dimension": 2,
        "poles": [[0.0, 0.0], [1.0, 0.5], [-0.5, 1.0]],
        "residues": [
            [[[0.03, 0.01], [0.02, 0.0]], [[-0.01, 0.0], [0.01, -0.02]]],
            [[[-0.01, 0.0], [0.0, 0.02]], [[0.025, 0.0], [-0.02, 0.01]]],
            [[[-0.02, -0.01], [-0.02, -0.02]], [[-0.015, 0.0], [0.01, 0.01]]],
        ],
    })
}

fn matrices(v: &Value) -> Vec<Vec<Vec<(f64, f64)>>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|m| {
            m.as_array()
                .unwrap()
                .iter()
                .map(|r| {
                    r.as_array()
                        .unwrap()
                        .iter()
                        .map(|c| (c[0].as_f64().unwrap(), c[1].as_f64().unwrap()))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn max_diff(a: &Value, b: &Value) -> f64 {
    let (a, b) = (matrices(a), matrices(b));
    assert_eq!(a.len(), b.len());
    a.iter()
        .flatten()
        .flatten()
        .zip(b.iter().flatten().flatten())
        .map(|(x, y)| (x.0 - y.0).hypot(x.1 - y.1))
        .fold(0.0, f64::max)
}

#[test]
fn check_reports_a_valid_system() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sys.json", &commuting_system());
    let out = fuchsia(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("non-resonant: true"), "{stdout}");
    assert!(stdout.contains("levelt"));
}

#[test]
fn check_rejects_a_residue_sum_defect() {
    let dir = TempDir::new().unwrap();
    let mut sys = commuting_system();
    sys["residues"][2] = diag(&[0.2, -0.15]);
    let f = write(&dir, "sys.json", &sys);
    let out = fuchsia(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("||sum B_i|| = 1.0000"), "{stderr}");
}

#[test]
fn resonance_is_a_warning() {
    let dir = TempDir::new().unwrap();
    let sys = json!({
        "dimension": 2,
        "poles": [[0.0, 0.0], [2.0, 0.0]],
        "residues": [diag(&[0.5, 1.5]), diag(&[-0.5, -1.5])],
    });
    let f = write(&dir, "sys.json", &sys);
    let out = fuchsia(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resonant"));
    let out = fuchsia(&["galois", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"dimension\": 2, ").unwrap();
    for cmd in ["check", "galois", "monodromy", "verify", "invert"] {
        assert_eq!(fuchsia(&[cmd, s(&p)]).status.code(), Some(2), "{cmd}");
    }
    assert_eq!(
        fuchsia(&["check", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    let f = write(&dir, "sys.json", &commuting_system());
    assert_eq!(
        fuchsia(&["monodromy", s(&f), "--base", "abc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fuchsia(&["monodromy", s(&f), "--base", "0+0i"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_commuting_system_passes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sys.json", &commuting_system());
    let report = dir.path().join("report.json");
    let out = fuchsia(&["verify", s(&f), "--json", s(&report)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = read_json(&report);
    assert_eq!(r["schema"], "fuchsia-report/1");
    assert_eq!(r["loop_convention"], "ccw-radial-angular/1");
    assert_eq!(r["verdict"], true);
    for v in r["pole_verdicts"].as_array().unwrap() {
        assert_eq!(v["status"], "pass");
    }
    // closed form: M_j = exp(2 pi i B_j) for diagonal residues
    let b = [[0.2, -0.1], [-0.3, 0.25], [0.1, -0.15]];
    for (j, m) in matrices(&r["monodromy"]).iter().enumerate() {
        for k in 0..2 {
            let phase = 2.0 * std::f64::consts::PI * b[j][k];
            let (re, im) = m[k][k];
            assert!((re - phase.cos()).hypot(im - phase.sin()) < 1e-7);
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sys.json", &small_system());
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(
        fuchsia(&["monodromy", s(&f), "--json", s(&a), "--quiet"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        fuchsia(&["monodromy", s(&f), "--json", s(&b), "--quiet"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn invert_round_trip_and_pipeline_closure() {
    let tol = 1e-8;
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sys.json", &small_system());
    let m1 = dir.path().join("m1.json");
    let recovered = dir.path().join("recovered.json");
    let m2 = dir.path().join("m2.json");
    assert_eq!(
        fuchsia(&["monodromy", s(&f), "--json", s(&m1), "--quiet"])
            .status
            .code(),
        Some(0)
    );
    let out = fuchsia(&["invert", s(&m1), "--json", s(&recovered)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged"));
    assert!(
        max_diff(
            &read_json(&recovered)["residues"],
            &small_system()["residues"]
        ) <= 1e-6
    );
    assert_eq!(
        fuchsia(&["monodromy", s(&recovered), "--json", s(&m2), "--quiet"])
            .status
            .code(),
        Some(0)
    );
    let (r1, r2) = (read_json(&m1), read_json(&m2));
    assert_eq!(r1["base_point"], r2["base_point"]);
    assert!(max_diff(&r1["monodromy"], &r2["monodromy"]) <= 10.0 * tol);
}

#[test]
fn invert_rejects_a_foreign_convention() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sys.json", &small_system());
    let m = dir.path().join("m.json");
    fuchsia(&["monodromy", s(&f), "--json", s(&m), "--quiet"]);
    let mut r = read_json(&m);
    r["loop_convention"] = json!("cw/0");
    let bad = write(&dir, "bad.json", &r);
    assert_eq!(fuchsia(&["invert", s(&bad)]).status.code(), Some(2));
}

#[test]
fn invert_reports_non_convergence() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sys.json", &small_system());
    let m = dir.path().join("m.json");
    fuchsia(&["monodromy", s(&f), "--json", s(&m), "--quiet"]);
    let out = fuchsia(&["invert", s(&m), "--max-iter", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn convert_scalar_to_companion() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "eq.json",
        &json!({"order": 2, "coeffs": ["1/(z-1)", "2i/5*z"]}),
    );
    let out = fuchsia(&["convert", "--from", "scalar", "--to", "matrix", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        v,
        json!({"dimension": 2, "matrix": [["0", "1"], ["-1/(z-1)", "-2i/5*z"]]})
    );
}

#[test]
fn convert_through_modules() {
    let dir = TempDir::new().unwrap();
    let a = json!({"dimension": 2, "matrix": [["1/z", "z^2"], ["i", "0"]]});
    let f = write(&dir, "a.json", &a);
    let module = dir.path().join("module.json");
    let out = fuchsia(&[
        "convert",
        "--from",
        "matrix",
        "--to",
        "module",
        s(&f),
        "--json",
        s(&module),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = read_json(&module);
    assert_eq!(m["convention"], "neg-transpose");
    assert_eq!(m["action"], json!([["-1/z", "-i"], ["-z^2", "0"]]));
    let out = fuchsia(&["convert", "--from", "module", "--to", "matrix", s(&module)]);
    assert_eq!(serde_json::from_slice::<Value>(&out.stdout).unwrap(), a);

    let zero = write(
        &dir,
        "zero.json",
        &json!({"dimension": 2, "matrix": [["0", "0"], ["0", "0"]]}),
    );
    let basis = write(
        &dir,
        "basis.json",
        &json!({"dimension": 2, "matrix": [["z", "0"], ["0", "1"]]}),
    );
    let out = fuchsia(&[
        "convert",
        "--from",
        "matrix",
        "--to",
        "matrix",
        s(&zero),
        "--basis",
        s(&basis),
    ]);
    assert_eq!(
        serde_json::from_slice::<Value>(&out.stdout).unwrap(),
        json!({"dimension": 2, "matrix": [["-1/z", "0"], ["0", "0"]]})
    );
    assert_eq!(
        fuchsia(&["convert", "--from", "matrix", "--to", "scalar", s(&f)])
            .status
            .code(),
        Some(2)
    );
}
