//! End-to-end tests of the `projlab` binary: the exit-code contract
//! (0 pass, 1 runtime error, 2 criteria fail, 3 divergence), file
//! contents and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn projlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path.to_string_lossy().into_owned()
}

const AXES_3D: &str = r#"{
  "space": {"dim": 3, "p": 2},
  "projectors": [
    {"range": [[1.0, 0.0, 0.0]]},
    {"range": [[0.0, 1.0, 0.0]]},
    {"range": [[0.0, 0.0, 1.0]]}
  ]
}"#;

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", AXES_3D);
    let out = projlab(&["validate", &good], dir.path());
    assert_eq!(out.status.code(), Some(0));

    let bad = write(dir.path(), "bad.json", "{ this is not json");
    let out = projlab(&["validate", &bad], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let missing_seed = write(
        dir.path(),
        "noseed.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [{"range": [[1.0, 0.0]]}, {"range": [[0.0, 1.0]]}],
  "schedule": {"kind": "random", "mu": [0.5, 0.5], "steps": 10}
}"#,
    );
    let out = projlab(&["validate", &missing_seed], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed required"), "stderr: {stderr}");
}

#[test]
fn angles_coordinate_axes_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "axes.json", AXES_3D);
    let out = projlab(&["angles", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/angles.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "j1,j2,cos_lower,cos_upper,exact,friedrichs");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row.ends_with(",0,0,true,0"), "row: {row}");
    }
}

#[test]
fn angles_sixty_degree_lines() {
    let dir = tempfile::tempdir().unwrap();
    let theta = std::f64::consts::PI / 3.0;
    let scenario = write(
        dir.path(),
        "sixty.json",
        &format!(
            r#"{{
  "space": {{"dim": 2, "p": 2}},
  "projectors": [
    {{"range": [[1.0, 0.0]]}},
    {{"range": [[{}, {}]]}}
  ]
}}"#,
            theta.cos(),
            theta.sin()
        ),
    );
    let out = projlab(&["angles", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/angles.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let upper: f64 = fields[3].parse().unwrap();
    assert!((upper - 0.5).abs() <= 1e-9, "cos_upper = {upper}");
}

#[test]
fn angles_incompatible_pair_names_indices() {
    // An oblique projector onto the e1 axis against the orthogonal one:
    // the auto pair candidate fails the absorption identity.
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "oblique.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [
    {"range": [[1.0, 0.0]], "kernel": [[-1.0, 1.0]]},
    {"range": [[1.0, 0.0]]}
  ]
}"#,
    );
    let out = projlab(&["angles", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(1,2)"), "stderr: {stderr}");
}

#[test]
fn criteria_pass_and_fail_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let passing = write(
        dir.path(),
        "pass.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [{"range": [[1.0, 0.0]]}, {"range": [[0.0, 1.0]]}],
  "criteria": ["averaged", "cyclic"]
}"#,
    );
    let out = projlab(&["criteria", &passing, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/criteria.csv")).unwrap();
    assert!(csv.starts_with("name,pass,r_or_q,C,gamma\n"));
    assert!(csv.contains("averaged,pass,"));
    assert!(csv.contains("cyclic,pass,"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/criteria.json")).unwrap())
            .unwrap();
    assert_eq!(json["beta"], 1.0);
    assert!(json["hypotheses"]["averaged"]["pass"].as_bool().unwrap());

    // Nearly parallel lines: certification correctly declines.
    let theta = 5.0_f64.to_radians();
    let failing = write(
        dir.path(),
        "fail.json",
        &format!(
            r#"{{
  "space": {{"dim": 2, "p": 2}},
  "projectors": [
    {{"range": [[1.0, 0.0]]}},
    {{"range": [[{}, {}]]}}
  ],
  "criteria": ["averaged"]
}}"#,
            theta.cos(),
            theta.sin()
        ),
    );
    let out = projlab(&["criteria", &failing, "--out", "out2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("out2/criteria.csv")).unwrap();
    assert!(csv.contains("averaged,fail,"));
}

#[test]
fn criteria_rate_can_pass_while_gamma_budget_fails() {
    // Cosine 0.15 sits inside the direct rate criterion but beyond the
    // uniform angle budget gamma'/2 ~ 0.093. Both rows are reported; only
    // the requested criterion gates the exit code.
    let dir = tempfile::tempdir().unwrap();
    let c: f64 = 0.15;
    let scenario = write(
        dir.path(),
        "midband.json",
        &format!(
            r#"{{
  "space": {{"dim": 2, "p": 2}},
  "projectors": [
    {{"range": [[1.0, 0.0]]}},
    {{"range": [[{}, {}]]}}
  ],
  "criteria": ["averaged"]
}}"#,
            c,
            (1.0 - c * c).sqrt()
        ),
    );
    let out = projlab(&["criteria", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/criteria.csv")).unwrap();
    assert!(csv.contains("averaged,pass,"), "csv: {csv}");
    assert!(csv.contains("averaged_gamma,fail,"), "csv: {csv}");
}

#[test]
fn criteria_beta_out_of_range_fails_all_rows() {
    // A strongly oblique family has projector norms past the admissible
    // bound 1 + 1/(n-1); every budget-based row reports it.
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "bigbeta.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [
    {"range": [[1.0, 0.0]], "kernel": [[-3.0, 1.0]]},
    {"range": [[0.0, 1.0]], "kernel": [[1.0, -3.0]]}
  ],
  "criteria": ["averaged", "cyclic"]
}"#,
    );
    let out = projlab(&["criteria", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("out of range"), "stdout: {stdout}");
    let csv = fs::read_to_string(dir.path().join("out/criteria.csv")).unwrap();
    assert!(csv.contains("averaged,fail,"));
    assert!(csv.contains("cyclic,fail,"));
}

#[test]
fn run_divergence_exits_three() {
    // Strongly oblique pair: the averaged operator has spectral radius 2
    // and cyclic products blow up, tripping the stability monitor.
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "diverge.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [
    {"range": [[1.0, 0.0]], "kernel": [[-3.0, 1.0]]},
    {"range": [[0.0, 1.0]], "kernel": [[1.0, -3.0]]}
  ],
  "schedule": {"kind": "cyclic", "steps": 500}
}"#,
    );
    let out = projlab(&["run", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("diverged"), "stderr: {stderr}");
}

#[test]
fn run_trace_reproducible_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "rand.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [{"range": [[1.0, 0.0]]}, {"range": [[0.0, 1.0]]}],
  "schedule": {"kind": "random", "mu": [0.5, 0.5], "seed": 42, "steps": 300}
}"#,
    );
    let out = projlab(&["run", &scenario, "--out", "a", "--svg"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let out = projlab(&["run", &scenario, "--out", "b"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let a = fs::read(dir.path().join("a/trace.csv")).unwrap();
    let b = fs::read(dir.path().join("b/trace.csv")).unwrap();
    assert_eq!(a, b);
    let svg = fs::read_to_string(dir.path().join("a/trace.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("deviation"));

    let csv = String::from_utf8(a).unwrap();
    assert!(csv.starts_with("step,deviation,envelope,violated\n"));
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn run_averaged_final_deviation_closed_form() {
    // Perpendicular lines: T = I/2, final deviation 2^-steps <= 4*2^-steps.
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "avg.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [{"range": [[1.0, 0.0]]}, {"range": [[0.0, 1.0]]}],
  "alphas": [0.5, 0.5],
  "schedule": {"kind": "averaged", "steps": 12}
}"#,
    );
    let out = projlab(&["run", &scenario, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0], "12");
    let dev: f64 = fields[1].parse().unwrap();
    assert!((dev - 2.0_f64.powi(-12)).abs() <= 1e-12);
    let env: f64 = fields[2].parse().unwrap();
    assert!(dev <= env + 1e-9);
    assert_eq!(fields[3], "false");
}

#[test]
fn seed_sweep_writes_one_trace_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "sweep.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [{"range": [[1.0, 0.0]]}, {"range": [[0.0, 1.0]]}],
  "schedule": {"kind": "random", "mu": [0.5, 0.5], "seed": 0, "steps": 100}
}"#,
    );
    let out = projlab(
        &["run", &scenario, "--out", "out", "--seeds", "1,2,3", "--jobs", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    for seed in [1, 2, 3] {
        assert!(dir.path().join(format!("out/trace_seed{seed}.csv")).exists());
    }
    // A sweep's per-seed file matches the plain run with that seed.
    let single = write(
        dir.path(),
        "single.json",
        r#"{
  "space": {"dim": 2, "p": 2},
  "projectors": [{"range": [[1.0, 0.0]]}, {"range": [[0.0, 1.0]]}],
  "schedule": {"kind": "random", "mu": [0.5, 0.5], "seed": 2, "steps": 100}
}"#,
    );
    let out = projlab(&["run", &single, "--out", "single_out"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let sweep_bytes = fs::read(dir.path().join("out/trace_seed2.csv")).unwrap();
    let single_bytes = fs::read(dir.path().join("single_out/trace.csv")).unwrap();
    assert_eq!(sweep_bytes, single_bytes);
}

#[test]
fn validate_names_bad_weights_field() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "weights.json",
        r#"{
  "space": {"dim": 2, "p": 2, "weights": [1.0]},
  "projectors": [{"range": [[1.0, 0.0]]}]
}"#,
    );
    let out = projlab(&["validate", &scenario], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("space.weights"), "stderr: {stderr}");
}
