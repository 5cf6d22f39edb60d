//! `pedheading` command line: `simulate`, `estimate`, `evaluate`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::eval::{baseline_from_hints, score, turn_latency, write_cdf, ErrorSummary, SummaryRecord};
use crate::filter::FilterConfig;
use crate::fusion::{fuse, write_fusion_dump, FusionConfig};
use crate::geom::{PhoneVec, Quaternion};
use crate::heading::{estimate_headings, parse_estimates, write_estimates, HeadingEstimate, WindowConfig};
use crate::sim::{generate_trace, vertical_gyro_bias, write_sim_debug, MagDisturbance, PosePreset, WalkSimConfig};
use crate::trace::{parse_ground_truth, parse_trace, resample, write_ground_truth, write_trace, GroundTruth};

#[derive(Debug, Parser)]
#[command(name = "pedheading", version, about = "Walking-heading estimation from phone IMU traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic walking trace and its ground truth.
    Simulate(SimulateArgs),
    /// Estimate the walking heading from a trace.
    Estimate(EstimateArgs),
    /// Score an estimate stream against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoseArg {
    Flat,
    #[value(name = "pocket_tilt", alias = "pocket-tilt")]
    PocketTilt,
    #[value(name = "shirt_vertical", alias = "shirt-vertical")]
    ShirtVertical,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GyroUnits {
    Rad,
    Deg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Azimuth,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Initial heading, degrees clockwise from North.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub heading: f64,
    #[arg(long, value_enum, default_value_t = PoseArg::Flat)]
    pub pose: PoseArg,
    /// Phone→user quaternion `w,x,y,z` for `--pose custom`.
    #[arg(long, value_name = "W,X,Y,Z", allow_negative_numbers = true)]
    pub pose_quat: Option<String>,
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 50.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub step_freq: f64,
    #[arg(long, default_value_t = 1.5)]
    pub forward_amp: f64,
    #[arg(long, default_value_t = 0.4)]
    pub lateral_amp: f64,
    #[arg(long, default_value_t = 1.2)]
    pub vertical_amp: f64,
    /// Peak phone yaw sway at stride frequency, degrees.
    #[arg(long, default_value_t = 5.0)]
    pub yaw_sway: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_accel: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_gyro: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_mag: f64,
    /// Phone-frame gyro bias `x,y,z` in rad/s.
    #[arg(long, value_name = "X,Y,Z", allow_negative_numbers = true)]
    pub gyro_bias: Option<String>,
    /// Additional gyro bias about the world vertical, deg/s.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub yaw_bias: f64,
    /// Turn `T:HEADING` (seconds, degrees); repeatable.
    #[arg(long = "turn", value_name = "T:HEADING")]
    pub turns: Vec<String>,
    /// Magnetometer offset `T0:T1:X,Y,Z` (seconds, µT); repeatable.
    #[arg(long = "disturbance", value_name = "T0:T1:X,Y,Z", allow_negative_numbers = true)]
    pub disturbances: Vec<String>,
    #[arg(long, default_value_t = 45.0, allow_negative_numbers = true)]
    pub dip: f64,
    #[arg(long, default_value_t = 50.0)]
    pub field: f64,
    /// Trace CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth CSV to write.
    #[arg(long)]
    pub truth: PathBuf,
    /// Optional per-sample true orientation CSV.
    #[arg(long)]
    pub debug: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Estimate CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Window length, s.
    #[arg(long, default_value_t = 3.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0.5)]
    pub hop: f64,
    /// Low-pass smoothing factor.
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Gravity reference tolerance, m/s².
    #[arg(long, default_value_t = 0.3)]
    pub gravity_tol: f64,
    /// Gravity correction gain at reference samples (1 = snap).
    #[arg(long, default_value_t = 1.0)]
    pub gravity_gain: f64,
    /// Compass–gyro correlation threshold.
    #[arg(long, default_value_t = 0.8)]
    pub rel_threshold: f64,
    #[arg(long, default_value_t = 0.02)]
    pub yaw_blend: f64,
    #[arg(long, default_value_t = 0.05)]
    pub min_energy: f64,
    #[arg(long, default_value_t = 1.5)]
    pub anisotropy_min: f64,
    #[arg(long, value_enum, default_value_t = GyroUnits::Rad)]
    pub gyro_units: GyroUnits,
    /// Negate magnetometer readings on ingest.
    #[arg(long)]
    pub negate_mag: bool,
    /// Resample the trace to this rate (Hz) before fusion.
    #[arg(long)]
    pub resample: Option<f64>,
    /// Write per-sample fusion states to this CSV.
    #[arg(long)]
    pub dump_fusion: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub estimates: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Summary JSON to write.
    #[arg(long)]
    pub summary: PathBuf,
    /// CDF CSV to write.
    #[arg(long)]
    pub cdf: PathBuf,
    /// Also score the phone-azimuth comparator.
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Window length used by the estimator, s (guard band and emission delay).
    #[arg(long, default_value_t = 3.0)]
    pub window: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config: &'a C,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(cmd: &Command) -> anyhow::Result<()> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
    }
}

fn parse_floats<const N: usize>(s: &str, what: &str) -> anyhow::Result<[f64; N]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        bail!("{what}: expected {N} comma-separated numbers, got `{s}`");
    }
    let mut out = [0.0f64; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().with_context(|| format!("{what}: `{p}` is not a number"))?;
        if !slot.is_finite() {
            bail!("{what}: `{p}` is not finite");
        }
    }
    Ok(out)
}

fn sim_config(a: &SimulateArgs) -> anyhow::Result<WalkSimConfig> {
    let pose = match (a.pose, &a.pose_quat) {
        (PoseArg::Custom, Some(q)) => {
            let [w, x, y, z] = parse_floats::<4>(q, "--pose-quat")?;
            let q = Quaternion::new(w, x, y, z);
            if (q.norm() - 1.0).abs() > 1e-6 {
                bail!("--pose-quat must be a unit quaternion (norm {})", q.norm());
            }
            q
        }
        (PoseArg::Custom, None) => bail!("--pose custom requires --pose-quat"),
        (_, Some(_)) => bail!("--pose-quat is only valid with --pose custom"),
        (PoseArg::Flat, None) => PosePreset::Flat.quaternion(),
        (PoseArg::PocketTilt, None) => PosePreset::PocketTilt.quaternion(),
        (PoseArg::ShirtVertical, None) => PosePreset::ShirtVertical.quaternion(),
    };
    let mut bias = match &a.gyro_bias {
        Some(s) => PhoneVec::from_array(parse_floats::<3>(s, "--gyro-bias")?),
        None => PhoneVec::zero(),
    };
    bias += vertical_gyro_bias(&pose, a.yaw_bias.to_radians())?;

    let mut schedule = Vec::new();
    for t in &a.turns {
        let (time, heading) = t.split_once(':').with_context(|| format!("--turn `{t}` must look like T:HEADING"))?;
        let [time] = parse_floats::<1>(time, "--turn time")?;
        let [heading] = parse_floats::<1>(heading, "--turn heading")?;
        schedule.push((time, heading));
    }
    let mut disturbances = Vec::new();
    for d in &a.disturbances {
        let mut it = d.splitn(3, ':');
        let (Some(t0), Some(t1), Some(v)) = (it.next(), it.next(), it.next()) else {
            bail!("--disturbance `{d}` must look like T0:T1:X,Y,Z");
        };
        let [t_start] = parse_floats::<1>(t0, "--disturbance start")?;
        let [t_end] = parse_floats::<1>(t1, "--disturbance end")?;
        disturbances.push(MagDisturbance {
            t_start,
            t_end,
            offset: PhoneVec::from_array(parse_floats::<3>(v, "--disturbance offset")?),
        });
    }

    Ok(WalkSimConfig {
        heading_deg: a.heading,
        heading_schedule: schedule,
        pose,
        duration: a.duration,
        rate: a.rate,
        step_freq: a.step_freq,
        accel_forward_amp: a.forward_amp,
        accel_lateral_amp: a.lateral_amp,
        accel_vertical_amp: a.vertical_amp,
        yaw_sway_deg: a.yaw_sway,
        noise_accel_sigma: a.noise_accel,
        noise_gyro_sigma: a.noise_gyro,
        gyro_bias: bias,
        noise_mag_sigma: a.noise_mag,
        mag_disturbances: disturbances,
        dip_deg: a.dip,
        field_strength: a.field,
        seed: a.seed,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn read_file(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

/// `<file>.manifest.json` beside each output.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

fn write_manifests<C: Serialize>(
    command: &'static str,
    seed: Option<u64>,
    config: &C,
    inputs: &[&Path],
    outputs: &[&Path],
) -> anyhow::Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        config,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    for out in outputs {
        write_file(&manifest_path(out), json.as_bytes())?;
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let cfg = sim_config(a)?;
    let out = generate_trace(&cfg)?;

    let mut buf = Vec::new();
    write_trace(&out.trace, &mut buf)?;
    write_file(&a.out, &buf)?;
    buf.clear();
    write_ground_truth(&out.truth, &mut buf)?;
    write_file(&a.truth, &buf)?;
    let mut outputs = vec![a.out.as_path(), a.truth.as_path()];
    if let Some(path) = &a.debug {
        buf.clear();
        write_sim_debug(&out, &mut buf)?;
        write_file(path, &buf)?;
        outputs.push(path);
    }
    write_manifests("simulate", Some(a.seed), a, &[], &outputs)
}

fn cmd_estimate(a: &EstimateArgs) -> anyhow::Result<()> {
    let fusion = FusionConfig {
        gravity_tolerance: a.gravity_tol,
        reliability_threshold: a.rel_threshold,
        yaw_blend: a.yaw_blend,
        gravity_gain: a.gravity_gain,
        ..Default::default()
    };
    fusion.validate()?;
    let filt = FilterConfig::new(a.delta)?;
    let win = WindowConfig { omega: a.window, hop: a.hop, min_energy: a.min_energy, anisotropy_min: a.anisotropy_min };
    win.validate()?;

    let bytes = read_file(&a.trace)?;
    let mut trace = parse_trace(bytes.as_slice()).with_context(|| format!("parsing {}", a.trace.display()))?;
    if a.gyro_units == GyroUnits::Deg || a.negate_mag {
        let scale = if a.gyro_units == GyroUnits::Deg { 1f64.to_radians() } else { 1.0 };
        let negate = a.negate_mag;
        trace = trace.map_samples(|s| {
            s.gyro = s.gyro * scale;
            if negate {
                s.mag = -s.mag;
            }
        })?;
    }
    if let Some(rate) = a.resample {
        trace = resample(&trace, rate)?;
    }

    let states = fuse(&trace, &fusion)?;
    let estimates = estimate_headings(&states, &filt, &win)?;

    let mut buf = Vec::new();
    write_estimates(&estimates, &mut buf)?;
    write_file(&a.out, &buf)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(path) = &a.dump_fusion {
        buf.clear();
        write_fusion_dump(&states, &mut buf)?;
        write_file(path, &buf)?;
        outputs.push(path);
    }
    write_manifests("estimate", None, a, &[&a.trace], &outputs)
}

/// `summary.json` → `summary-azimuth.json`.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

fn score_and_write(
    name: &str,
    estimates: &[HeadingEstimate],
    truth: &GroundTruth,
    window: f64,
    summary_path: &Path,
    cdf_path: &Path,
) -> anyhow::Result<ErrorSummary> {
    let summary = score(estimates, truth, window)?;
    let latency =
        if truth.transitions().is_empty() { None } else { Some(turn_latency(estimates, truth, 0.5 * window)?) };
    let record = SummaryRecord::new(name, &summary, latency.as_ref());
    let mut json = serde_json::to_string_pretty(&record)?;
    json.push('\n');
    write_file(summary_path, json.as_bytes())?;
    let mut buf = Vec::new();
    write_cdf(&summary, &mut buf)?;
    write_file(cdf_path, &buf)?;
    println!("{}", summary.format_row(name));
    Ok(summary)
}

fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<()> {
    if !(a.window > 0.0 && a.window.is_finite()) {
        bail!("--window must be positive");
    }
    let estimates = parse_estimates(read_file(&a.estimates)?.as_slice())
        .with_context(|| format!("parsing {}", a.estimates.display()))?;
    let truth = parse_ground_truth(read_file(&a.truth)?.as_slice())
        .with_context(|| format!("parsing {}", a.truth.display()))?;
    if estimates.is_empty() {
        bail!("{} contains no estimates", a.estimates.display());
    }
    let first = estimates[0].t_center;
    let last = estimates[estimates.len() - 1].t_center;
    if last < truth.start() || first > truth.end() {
        bail!("estimates span [{first}, {last}] s but ground truth spans [{}, {}] s", truth.start(), truth.end());
    }

    score_and_write("pedheading", &estimates, &truth, a.window, &a.summary, &a.cdf)?;
    let mut outputs = vec![a.summary.clone(), a.cdf.clone()];
    if a.baseline == Some(Baseline::Azimuth) {
        let base = baseline_from_hints(&estimates);
        let (s, c) = (suffixed(&a.summary, "azimuth"), suffixed(&a.cdf, "azimuth"));
        score_and_write("azimuth", &base, &truth, a.window, &s, &c)?;
        outputs.extend([s, c]);
    }
    let outputs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifests("evaluate", None, a, &[&a.estimates, &a.truth], &outputs)
}
