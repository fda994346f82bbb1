mod common;

use std::path::{Path, PathBuf};

use mixsynth::cli::run_with;
use mixsynth::io::{to_json, SystemFile};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    out: String,
    err: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.out).unwrap_or_else(|e| panic!("bad json ({e}): {}", self.out))
    }
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["mixsynth"];
    full.extend_from_slice(args);
    let code = run_with(full, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn system_file(dir: &TempDir, name: &str, sys: &mixsynth::StandardSystem) -> PathBuf {
    write(dir, name, &to_json(&SystemFile::from_standard(sys)))
}

fn residual(report: &Value, name: &str) -> f64 {
    report["report"]["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap()["residual"]
        .as_f64()
        .unwrap()
}

#[test]
fn check_realizable_system() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "ex.json", &common::mixed_feedback());
    let r = run(&["check", s(&f), "--form", "standard"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = r.json();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["report"]["verdict"], "pass");
    for name in ["state", "nondemolition", "output_ito"] {
        assert!(residual(&v, name) <= 1e-9);
    }
    assert_eq!(v["partitioned"]["conditions"].as_array().unwrap().len(), 10);
}

#[test]
fn check_bad_shape_is_input_error() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "broken.json",
        r#"{"form":"standard","dims":{"n_q":1,"n_c":1,"m":3,"n_yq":1,"n_yc":1},
            "a":[[0,0,0],[0,0,0],[0,0,0]],"b":[[0,0,0,0],[0,0,0,0],[0,0,0,0]],
            "c":[[0,0,0],[0,0,0],[0,0,0]],"d":[[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0]]}"#,
    );
    let r = run(&["check", s(&f)]);
    assert_eq!(r.code, 2);
    assert!(
        r.err.contains("B: expected shape 3x6, found 3x4"),
        "{}",
        r.err
    );
    assert!(r.out.is_empty());
}

#[test]
fn check_perturbed_system_fails() {
    let dir = TempDir::new().unwrap();
    let mut sys = common::mixed_feedback();
    sys.a[(0, 0)] += 1.0;
    let f = system_file(&dir, "perturbed.json", &sys);
    let r = run(&["check", s(&f)]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["report"]["verdict"], "fail");
    assert_eq!(v["report"]["worst"], "state");
}

#[test]
fn check_wrong_form_and_syntax_errors() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "ex.json", &common::damped_cavity());
    assert_eq!(run(&["check", s(&f), "--form", "general"]).code, 2);
    let g = write(&dir, "bad.json", "{\"form\": \"standard\",\n\"dims\": ]");
    let r = run(&["check", s(&g)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("line 2"), "{}", r.err);
    assert_eq!(run(&["check", "/nonexistent/file.json"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn check_general_and_quantum_forms() {
    let dir = TempDir::new().unwrap();
    let g = write(
        &dir,
        "g.json",
        r#"{"form":"general","a":[[-0.5,0],[0,-0.5]],"b":[[1,0],[0,1]],"c":[[-1,0],[0,-1]],
            "d":[[1,0],[0,1]],"theta":[[0,1],[-1,0]],"f_v":[[1,[0,1]],[[0,-1],1]],
            "f_y":[[1,[0,1]],[[0,-1],1]]}"#,
    );
    assert_eq!(run(&["check", s(&g)]).code, 0);
    let q = write(
        &dir,
        "q.json",
        r#"{"form":"quantum","n_q":1,"m":1,"a":[[-0.5,0],[0,-0.5]],"b":[[1,0],[0,1]],
            "c":[[-1,0],[0,-1]],"d":[[1,0],[0,1]]}"#,
    );
    let r = run(&["check", s(&q)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.json()["form"], "quantum");
}

#[test]
fn tolerance_precedence() {
    let dir = TempDir::new().unwrap();
    let mut sys = common::damped_cavity();
    sys.a[(0, 0)] += 1e-6;
    let f = system_file(&dir, "near.json", &sys);
    assert_eq!(run(&["check", s(&f)]).code, 1);
    let r = run(&["check", s(&f), "--tol", "1e-5"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["tol"], 1e-5);
    let text = std::fs::read_to_string(&f)
        .unwrap()
        .replacen('{', "{\"tol\": 1e-5,", 1);
    let g = write(&dir, "near_tol.json", &text);
    assert_eq!(run(&["check", s(&g)]).code, 0);
    assert_eq!(run(&["check", s(&g), "--tol", "1e-9"]).code, 1);
    assert_eq!(run(&["check", s(&g), "--tol", "-1"]).code, 2);
}

#[test]
fn to_standard_cases() {
    let dir = TempDir::new().unwrap();
    // fixed point
    let g = write(
        &dir,
        "g.json",
        r#"{"form":"general","a":[[-0.5,0],[0,-0.5]],"b":[[1,0],[0,1]],"c":[[-1,0],[0,-1]],
            "d":[[1,0],[0,1]],"theta":[[0,1],[-1,0]],"f_v":[[1,[0,1]],[[0,-1],1]],
            "f_y":[[1,[0,1]],[[0,-1],1]]}"#,
    );
    let r = run(&["to-standard", s(&g)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = r.json();
    assert_eq!(v["p_n"], serde_json::json!([[1.0, 0.0], [0.0, 1.0]]));
    assert!(v["transfer_max_deviation"].as_f64().unwrap() < 1e-12);
    // doubled commutator
    let text = std::fs::read_to_string(&g)
        .unwrap()
        .replace("\"theta\":[[0,1],[-1,0]]", "\"theta\":[[0,2],[-2,0]]");
    let g2 = write(&dir, "g2.json", &text);
    let v = run(&["to-standard", s(&g2)]).json();
    let p = v["p_n"][0][0].as_f64().unwrap();
    assert!((p - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    // pulled-back generated system
    let sys = mixsynth::synthesis::generate_realizable(mixsynth::Dimensions::new(1, 1, 2, 1, 1), 5)
        .unwrap();
    let gen = common::pullback(&sys, 9);
    let f = write(&dir, "pb.json", &to_json(&SystemFile::from_general(&gen)));
    let out = dir.path().join("tw.json");
    let r = run(&["to-standard", s(&f), "-o", s(&out), "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.err.is_empty() && r.out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["transfer_max_deviation"].as_f64().unwrap() <= 1e-8);
    for item in v["identity_residuals"].as_array().unwrap() {
        assert!(item["residual"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn synthesize_and_verify() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "ex.json", &common::mixed_feedback());
    let out = dir.path().join("real.json");
    let r = run(&["synthesize", s(&f), "-o", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["relative_reconstruction_error"].as_f64().unwrap() <= 1e-8);
    let r = run(&["verify-realization", s(&out), "--reference", s(&f)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(r.json()["passed"], true);

    let mut other = common::mixed_feedback();
    other.b[(2, 1)] = 0.5;
    let g = system_file(&dir, "other.json", &other);
    assert_eq!(
        run(&["verify-realization", s(&out), "--reference", s(&g)]).code,
        1
    );
}

#[test]
fn synthesize_fully_quantum_and_unrealizable() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "cav.json", &common::damped_cavity());
    let r = run(&["synthesize", s(&f)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = r.json();
    assert_eq!(v["r"], 0);
    assert_eq!(v["g2"]["a_cc_prime"], serde_json::json!([]));

    let mut bad = common::mixed_feedback();
    bad.d[(2, 1)] = 0.9;
    let g = system_file(&dir, "bad.json", &bad);
    let r = run(&["synthesize", s(&g)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["report"]["verdict"], "fail");
}

#[test]
fn simulate_cases() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "cav.json", &common::damped_cavity());
    let r = run(&["simulate", s(&f), "--t-final", "1", "--dt", "0.01"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = r.json();
    assert!(v["skew_drift"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["times"].as_array().unwrap().len(), 101);

    let zero = mixsynth::StandardSystem::new(
        mixsynth::Dimensions::new(1, 0, 1, 0, 0),
        nalgebra::DMatrix::zeros(2, 2),
        nalgebra::DMatrix::zeros(2, 2),
        nalgebra::DMatrix::zeros(0, 2),
        nalgebra::DMatrix::zeros(0, 2),
    );
    let z = system_file(&dir, "zero.json", &zero);
    let v = run(&["simulate", s(&z), "--t-final", "0.5", "--dt", "0.1"]).json();
    let sm = v["second_moments"].as_array().unwrap();
    assert!(sm.iter().all(|m| m == &sm[0]));

    let e = system_file(&dir, "ex.json", &common::mixed_feedback());
    let v = run(&["simulate", s(&e), "--t-final", "1", "--dt", "0.001"]).json();
    assert!(v["skew_drift"].as_f64().unwrap() <= 1e-6);

    assert_eq!(run(&["simulate", s(&f), "--dt", "0"]).code, 2);
}

#[test]
fn complete_symplectic_cases() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "dq.json",
        r#"{"form":"dq","m":1,"d_q":[[1,0],[0,1]]}"#,
    );
    let v = run(&["complete-symplectic", s(&f)]).json();
    assert_eq!(v["d_q_prime"], serde_json::json!([]));
    let f = write(
        &dir,
        "dq2.json",
        r#"{"form":"dq","m":2,"d_q":[[1,0,0,0],[0,1,0,0]]}"#,
    );
    let v = run(&["complete-symplectic", s(&f)]).json();
    assert_eq!(
        v["d_q_prime"],
        serde_json::json!([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    );
    let f = write(
        &dir,
        "dq3.json",
        r#"{"form":"dq","m":1,"d_q":[[1,0],[0,2]]}"#,
    );
    let r = run(&["complete-symplectic", s(&f)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("precondition"), "{}", r.err);
}

#[test]
fn augment_cases() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "cav.json", &common::damped_cavity());
    let v = run(&["augment", s(&f)]).json();
    assert_eq!(v["a_tilde"], serde_json::json!([[-0.5, 0.0], [0.0, -0.5]]));
    assert_eq!(v["c_bar"], serde_json::json!([[-1.0, -0.0], [-0.0, -1.0]]));

    let e = system_file(&dir, "ex.json", &common::mixed_feedback());
    let r = run(&["augment", s(&e)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = r.json();
    assert_eq!(v["reduced_check"]["verdict"], "pass");
    for item in v["relation_residuals"].as_array().unwrap() {
        assert!(item["residual"].as_f64().unwrap() <= 1e-9);
    }

    let mut sys = common::mixed_feedback();
    sys.c[(0, 2)] = 0.0;
    sys.c[(1, 2)] = 0.0;
    let z = system_file(&dir, "zc.json", &sys);
    let v = run(&["augment", s(&z)]).json();
    assert!(v["b_tilde"][3]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x.as_f64() == Some(0.0)));
}

#[test]
fn generate_is_deterministic() {
    let args = [
        "generate", "--seed", "7", "--n-q", "1", "--n-c", "1", "--m", "3", "--n-yq", "1", "--n-yc",
        "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.out, b.out);
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "gen.json", &a.out);
    assert_eq!(run(&["check", s(&f)]).code, 0);
    let bad = run(&[
        "generate", "--seed", "1", "--n-q", "1", "--n-c", "0", "--m", "1", "--n-yq", "2", "--n-yc",
        "0",
    ]);
    assert_eq!(bad.code, 2);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let f = system_file(&dir, "ex.json", &common::mixed_feedback());
    for cmd in [
        "check",
        "synthesize",
        "augment",
        "complete-symplectic",
        "to-standard",
    ] {
        let a = run(&[cmd, s(&f)]);
        let b = run(&[cmd, s(&f)]);
        assert_eq!(a.code, 0, "{cmd}: {}", a.err);
        assert_eq!(a.out, b.out, "{cmd}");
    }
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let mut sys = common::damped_cavity();
    sys.a[(0, 0)] += 1e-6;
    let f = system_file(&dir, "near.json", &sys);
    let bin = env!("CARGO_BIN_EXE_mixsynth");
    let status = |env: Option<&str>| {
        let mut cmd = std::process::Command::new(bin);
        cmd.args(["check", s(&f), "--quiet"])
            .env_remove("MIXSYNTH_TOL");
        if let Some(v) = env {
            cmd.env("MIXSYNTH_TOL", v);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(status(None), Some(1));
    assert_eq!(status(Some("1e-5")), Some(0));
    assert_eq!(status(Some("abc")), Some(2));
}
