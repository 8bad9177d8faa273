//! End-to-end tests of the command-line surface.

use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cubint"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cubint")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("cubint-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

#[test]
fn kernel_elliptic_f2_is_trivial() {
    let out = run(&["kernel", "--chart", "elliptic", "--select", "F2"]);
    let v = stdout_json(&out);
    assert_eq!(v["dimension"], 0);
    assert_eq!(v["sampled_dimension"], 0);
    assert_eq!(v["methods_agree"], true);
}

#[test]
fn kernel_cartesian_case1_plane() {
    let out = run(&["kernel", "--chart", "cartesian", "--select", "F2,F3"]);
    let v = stdout_json(&out);
    assert_eq!(v["dimension"], 2);
    let basis = v["basis"].as_array().unwrap();
    assert_eq!(basis.len(), 2);
    let nonzero_names: Vec<&str> = basis
        .iter()
        .flat_map(|b| {
            b.as_object()
                .unwrap()
                .iter()
                .filter(|(_, v)| v.as_str() != Some("0"))
                .map(|(k, _)| k.as_str())
        })
        .collect();
    assert!(nonzero_names.contains(&"A030") && nonzero_names.contains(&"A003"));
}

#[test]
fn kernel_polar_case1_dimension_two() {
    let out = run(&["kernel", "--chart", "polar", "--select", "F1,F3"]);
    let v = stdout_json(&out);
    assert_eq!(v["dimension"], 2);
}

#[test]
fn kernel_rejects_bad_selection() {
    let out = run(&["kernel", "--chart", "polar", "--select", "F9"]);
    assert_eq!(out.status.code(), Some(2));
}

const OSCILLATOR: &str = r#"{
  "coeffs": {"A120": "1/2", "A102": "1/2"},
  "g1": "-1/2*(x1^2*x2 + x2^3)",
  "g2": "1/2*(x1*x2^2 + x1^3)",
  "hbar": "0",
  "potential": {"chart": "cartesian", "v1": "1/2*x1^2", "v2": "1/2*x2^2"}
}"#;

#[test]
fn check_oscillator_candidate() {
    let path = write_temp("oscillator.json", OSCILLATOR);
    let out = run(&["check", "--candidate", path.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["all_zero"], true);
    assert_eq!(v["first_nonzero"], serde_json::Value::Null);
}

#[test]
fn check_corrupted_candidate_locates_eq3() {
    let corrupted = OSCILLATOR.replace(
        "-1/2*(x1^2*x2 + x2^3)",
        "-1/2*(x1^2*x2 + x2^3) + 1/10*x1^2",
    );
    let path = write_temp("corrupted.json", &corrupted);
    let out = run(&["check", "--candidate", path.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["all_zero"], false);
    assert_eq!(v["first_nonzero"], "eq3");
}

#[test]
fn check_rejects_schema_violation() {
    let path = write_temp("bad.json", r#"{"g1": "x1"}"#);
    let out = run(&["check", "--candidate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reduce_case2_third_derivative() {
    let out = run(&[
        "reduce",
        "--chart",
        "cartesian",
        "--coeff",
        "A120=1",
        "--target",
        "V2",
        "--fix",
        "1",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["var"], "x2");
    assert_eq!(v["coeffs"][0], "-1");
    assert_eq!(v["coeffs"][1], "0");
    assert_eq!(v["coeffs"][2], "0");
    assert_eq!(v["coeffs"][3], "0");
    assert_eq!(v["degenerate"], false);
}

#[test]
fn reduce_rejects_singular_fix() {
    let out = run(&[
        "reduce", "--chart", "polar", "--coeff", "A300=1", "--target", "V2", "--fix", "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn specfun_p2_zero_series() {
    let out = run(&[
        "specfun", "--kind", "P2", "--alpha", "0", "--w0", "0", "--dw0", "0", "--span",
        "-1:1", "--samples", "11",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,w,dw,err,pole_flag"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(cols[4], "0");
    }
}

#[test]
fn specfun_output_is_deterministic() {
    let args = [
        "specfun", "--kind", "P1", "--w0", "0", "--dw0", "0", "--span", "-1/10:1/10",
    ];
    // spans use plain floats on the CLI; rationals are not accepted here
    let args = {
        let mut a = args.to_vec();
        a[8] = "-0.1:0.1";
        a
    };
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "byte-identical output for equal inputs");
}

#[test]
fn compat_small_run_is_deterministic_and_tight() {
    let args = [
        "compat", "--chart", "polar", "--vectors", "3", "--points", "4", "--trials", "4",
        "--seed", "7",
    ];
    let a = run(&args);
    let v = stdout_json(&a);
    let worst: f64 = v["worst_residual"].as_str().unwrap().parse().unwrap();
    assert!(worst < 1e-9, "worst residual {worst}");
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solveg_oscillator_job() {
    let job = r#"{
      "potential": {"chart": "cartesian", "v1": "1/2*x1^2", "v2": "1/2*x2^2"},
      "coeffs": {"A120": "1/2", "A102": "1/2"},
      "window": {"x": [-1.0, 1.0], "y": [-1.0, 1.0]},
      "basepoint": [0.0, 0.0],
      "resolution": 41
    }"#;
    let path = write_temp("solveg.json", job);
    let out = run(&["solveg", "--job", path.to_str().unwrap()]);
    let v = stdout_json(&out);
    for k in 0..3 {
        let r: f64 = v["residual_norms"][k].as_str().unwrap().parse().unwrap();
        assert!(r < 1e-6, "residual {r}");
    }
}

#[test]
fn simulate_oscillator_job() {
    let job = r#"{
      "potential": {"chart": "cartesian", "v1": "1/2*x1^2", "v2": "1/2*x2^2"},
      "candidate": {
        "coeffs": {"A120": "1/2", "A102": "1/2"},
        "g1": "-1/2*(x1^2*x2 + x2^3)",
        "g2": "1/2*(x1*x2^2 + x1^3)"
      },
      "integrals": [{"name": "Y", "expr": "1/2*p1^2 + 1/2*x1^2"}],
      "state0": [0.7, -0.4, 0.3, 0.8],
      "t_end": 10.0,
      "tolerance": 1e-10
    }"#;
    let path = write_temp("simulate.json", job);
    let out = run(&["simulate", "--job", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "t,H,Y,X");
    // drift summary goes to stderr
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("max drift"), "stderr: {err}");
    for part in err.trim().trim_start_matches("max drift: ").split(' ') {
        let (_, val) = part.split_once('=').unwrap();
        let d: f64 = val.parse().unwrap();
        assert!(d < 1e-8, "drift {d} in {part}");
    }
}

#[test]
fn check_evaluates_residuals_at_point() {
    let corrupted = OSCILLATOR.replace(
        "-1/2*(x1^2*x2 + x2^3)",
        "-1/2*(x1^2*x2 + x2^3) + 1/10*x1^2",
    );
    let path = write_temp("corrupted_at.json", &corrupted);
    let out = run(&[
        "check",
        "--candidate",
        path.to_str().unwrap(),
        "--at",
        "0.5,0.25",
    ]);
    let v = stdout_json(&out);
    let vals = v["at"]["values"].as_array().unwrap();
    assert_eq!(vals.len(), 5);
    // eq3 residual is d/dx1 (x1^2/10) = x1/5 = 0.1 at the point
    let eq3: f64 = vals[0].as_str().unwrap().parse().unwrap();
    assert!((eq3 - 0.1).abs() < 1e-12, "eq3 at point {eq3}");
}

#[test]
fn specfun_accepts_job_file() {
    let job = r#"{
      "kind": "weierstrass",
      "g2": 1.0, "g3": 2.0,
      "w0": 1.0, "dw0": 1.0,
      "z_min": -0.5, "z_max": 0.5,
      "tolerance": 1e-12, "samples": 21
    }"#;
    let path = write_temp("wjob.json", job);
    let out = run(&["specfun", "--job", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn usage_error_exit_code() {
    let out = run(&["kernel", "--chart", "spherical", "--select", "F1"]);
    assert_eq!(out.status.code(), Some(2));
}
