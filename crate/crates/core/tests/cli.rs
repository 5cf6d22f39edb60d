use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pedheading::fusion::{fuse, FusionConfig};
use pedheading::heading::{estimate_headings, parse_estimates, WindowConfig};
use pedheading::{parse_trace, FilterConfig};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pedheading"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> (PathBuf, PathBuf) {
    let trace = format!("{name}.csv");
    let truth = format!("{name}_truth.csv");
    let mut args = vec!["simulate", "--out", &trace, "--truth", &truth];
    args.extend_from_slice(extra);
    ok(dir, &args);
    (dir.join(trace), dir.join(truth))
}

#[test]
fn simulate_writes_sixty_seconds_at_fifty_hz() {
    let tmp = TempDir::new().unwrap();
    let (trace, truth) =
        simulate(tmp.path(), "walk", &["--heading", "45", "--pose", "flat", "--duration", "60", "--seed", "7"]);
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().count(), 3001);
    assert!(text.starts_with("t,ax,ay,az,wx,wy,wz,mx,my,mz\n"));
    assert!(!text.contains('\r'));
    assert!(fs::read_to_string(truth).unwrap().starts_with("t_start,t_end,heading_deg\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("walk.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["heading"], 45.0);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let args = ["--heading", "10", "--noise-accel", "0.5", "--noise-gyro", "0.02", "--noise-mag", "2", "--seed", "3"];
    let (a, _) = simulate(tmp.path(), "a", &args);
    let (b, _) = simulate(tmp.path(), "b", &args);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn identity_custom_pose_equals_flat() {
    let tmp = TempDir::new().unwrap();
    let (a, _) = simulate(tmp.path(), "flat", &["--pose", "flat", "--duration", "10"]);
    let (b, _) = simulate(tmp.path(), "custom", &["--pose", "custom", "--pose-quat", "1,0,0,0", "--duration", "10"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn estimate_rates_and_window_options() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    simulate(d, "walk", &["--heading", "45", "--duration", "60"]);
    ok(d, &["estimate", "--trace", "walk.csv", "--out", "est.csv"]);
    let est = parse_estimates(fs::read(d.join("est.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(est.len(), 115);
    assert!(est.windows(2).all(|w| (w[1].t_center - w[0].t_center - 0.5).abs() < 1e-9));
    assert!(fs::read_to_string(d.join("est.csv"))
        .unwrap()
        .starts_with("t_center,theta_u_deg,axis_deg,confidence,gamma_deg\n"));

    ok(d, &["estimate", "--trace", "walk.csv", "--out", "est3.csv", "--window", "3", "--hop", "3"]);
    let est3 = parse_estimates(fs::read(d.join("est3.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(est3.len(), 20);
}

#[test]
fn unit_delta_matches_unfiltered_pipeline() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    simulate(
        d,
        "walk",
        &["--heading", "200", "--pose", "pocket_tilt", "--duration", "30", "--noise-accel", "0.5", "--seed", "2"],
    );
    ok(d, &["estimate", "--trace", "walk.csv", "--out", "est.csv", "--delta", "1.0"]);
    let cli = parse_estimates(fs::read(d.join("est.csv")).unwrap().as_slice()).unwrap();

    let trace = parse_trace(fs::read(d.join("walk.csv")).unwrap().as_slice()).unwrap();
    let states = fuse(&trace, &FusionConfig::default()).unwrap();
    // δ = 1 turns the filter into the identity, so this is the raw ℓ stream.
    let lib = estimate_headings(&states, &FilterConfig::new(1.0).unwrap(), &WindowConfig::default()).unwrap();
    assert_eq!(cli, lib);
}

#[test]
fn gyro_units_flag_converts_degrees() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    simulate(d, "walk", &["--heading", "70", "--duration", "20", "--turn", "8:160"]);
    ok(d, &["estimate", "--trace", "walk.csv", "--out", "rad.csv"]);
    let text = fs::read_to_string(d.join("walk.csv")).unwrap();
    let mut deg = String::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            deg.push_str(line);
        } else {
            let mut v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            for w in &mut v[4..7] {
                *w = w.to_degrees();
            }
            deg.push_str(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        }
        deg.push('\n');
    }
    fs::write(d.join("walk_deg.csv"), deg).unwrap();
    ok(d, &["estimate", "--trace", "walk_deg.csv", "--out", "deg.csv", "--gyro-units", "deg"]);
    let a = parse_estimates(fs::read(d.join("rad.csv")).unwrap().as_slice()).unwrap();
    let b = parse_estimates(fs::read(d.join("deg.csv")).unwrap().as_slice()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(pedheading::circular_difference(x.theta_u, y.theta_u) < 1e-6);
    }
}

#[test]
fn parse_errors_name_the_row() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let mut text = String::from("t,ax,ay,az,wx,wy,wz,mx,my,mz\n");
    for i in 0..10 {
        let t = if i == 6 { 0.01 } else { i as f64 * 0.02 };
        text.push_str(&format!("{t},0,0,9.8,0,0,0,0,-30,30\n"));
    }
    fs::write(d.join("bad.csv"), text).unwrap();
    let out = run(d, &["estimate", "--trace", "bad.csv", "--out", "e.csv"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 7"), "{err}");
    assert!(!d.join("e.csv").exists());
}

#[test]
fn evaluate_perfect_and_baseline() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    simulate(d, "walk", &["--heading", "45", "--pose", "shirt_vertical", "--duration", "60"]);
    ok(d, &["estimate", "--trace", "walk.csv", "--out", "est.csv"]);
    ok(
        d,
        &[
            "evaluate",
            "--estimates",
            "est.csv",
            "--truth",
            "walk_truth.csv",
            "--summary",
            "sum.json",
            "--cdf",
            "cdf.csv",
            "--baseline",
            "azimuth",
        ],
    );
    let primary: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("sum.json")).unwrap()).unwrap();
    let base: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("sum-azimuth.json")).unwrap()).unwrap();
    assert_eq!(primary["estimator"], "pedheading");
    assert!(primary["p50"].as_f64().unwrap() <= 2.0);
    assert!(primary["mean_settle_s"].is_null());
    assert!((base["p50"].as_f64().unwrap() - 85.0).abs() < 5.0, "{base}");
    let cdf = fs::read_to_string(d.join("cdf.csv")).unwrap();
    assert!(cdf.starts_with("error_deg,fraction\n"));
    assert!(cdf.trim_end().ends_with(",1"));

    // Perfect estimates: write truth headings into the estimate file.
    let mut perfect = String::from("t_center,theta_u_deg,axis_deg,confidence,gamma_deg\n");
    for i in 0..100 {
        let t = 1.5 + 0.5 * i as f64;
        perfect.push_str(&format!("{t},45,45,1,45\n"));
    }
    fs::write(d.join("perfect.csv"), perfect).unwrap();
    ok(
        d,
        &[
            "evaluate",
            "--estimates",
            "perfect.csv",
            "--truth",
            "walk_truth.csv",
            "--summary",
            "p.json",
            "--cdf",
            "p.csv",
        ],
    );
    let p: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("p.json")).unwrap()).unwrap();
    assert_eq!(p["p50"], 0.0);
    assert_eq!(p["n"], 100);
}

#[test]
fn evaluate_reports_turn_latency() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    simulate(d, "turn", &["--heading", "0", "--turn", "30:90", "--duration", "60"]);
    ok(d, &["estimate", "--trace", "turn.csv", "--out", "est.csv"]);
    ok(
        d,
        &["evaluate", "--estimates", "est.csv", "--truth", "turn_truth.csv", "--summary", "s.json", "--cdf", "c.csv"],
    );
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("s.json")).unwrap()).unwrap();
    let settle = s["mean_settle_s"].as_f64().unwrap();
    assert!((1.5..=4.5).contains(&settle), "{settle}");
}

#[test]
fn missing_inputs_fail_cleanly() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    simulate(d, "walk", &["--duration", "10"]);
    ok(d, &["estimate", "--trace", "walk.csv", "--out", "est.csv"]);
    let out = run(
        d,
        &["evaluate", "--estimates", "est.csv", "--truth", "absent.csv", "--summary", "s.json", "--cdf", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
    assert!(!d.join("s.json").exists());

    let out = run(d, &["estimate", "--trace", "walk.csv", "--out", "x.csv", "--delta", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(d, &["simulate", "--pose", "custom", "--out", "a.csv", "--truth", "b.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(d, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn span_mismatch_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("truth.csv"), "t_start,t_end,heading_deg\n0,10,0\n").unwrap();
    fs::write(d.join("est.csv"), "t_center,theta_u_deg,axis_deg,confidence,gamma_deg\n50,0,0,1,0\n").unwrap();
    let out = run(
        d,
        &["evaluate", "--estimates", "est.csv", "--truth", "truth.csv", "--summary", "s.json", "--cdf", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("span"));
}
