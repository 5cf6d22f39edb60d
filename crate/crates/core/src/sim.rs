//! Synthetic walking-IMU traces with known heading.
//!
//! The walker's linear acceleration is a three-axis sinusoid in the world
//! frame: forward at the step frequency, sideways at half of it (one sway per
//! stride) and vertical at the step frequency. The phone is held in a fixed
//! pose relative to the walker, plus a small yaw sway at stride frequency.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geom::{
    quaternion_from_euler, wrap_180, EulerAngles, HeadingAngle, PhoneVec, Quaternion, WorldVec, GRAVITY,
};
use crate::trace::{GroundTruth, ImuSample, ImuTrace, TruthSegment};

/// Duration of a heading change (s).
pub const TURN_DURATION: f64 = 1.0;
/// Shortest trace the simulator produces; one default estimation window.
pub const MIN_DURATION: f64 = 3.0;

/// Named phone poses relative to the walker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PosePreset {
    /// Screen up, top of the phone pointing forward.
    Flat,
    /// Trouser pocket: steeply pitched, slightly rolled, yawed 20°.
    PocketTilt,
    /// Upright in a shirt pocket, screen facing sideways (85° yaw offset).
    ShirtVertical,
    /// Phone→user rotation supplied directly.
    Custom(Quaternion),
}

impl PosePreset {
    /// Phone→user rotation.
    pub fn quaternion(&self) -> Quaternion {
        let from = |a: f64, b: f64, g: f64| quaternion_from_euler(&EulerAngles::from_degrees(a, b, g)).conjugate();
        match self {
            PosePreset::Flat => Quaternion::identity(),
            PosePreset::PocketTilt => from(-70.0, 15.0, 20.0),
            PosePreset::ShirtVertical => from(90.0, 0.0, 85.0),
            PosePreset::Custom(q) => *q,
        }
    }
}

impl FromStr for PosePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(PosePreset::Flat),
            "pocket_tilt" => Ok(PosePreset::PocketTilt),
            "shirt_vertical" => Ok(PosePreset::ShirtVertical),
            other => Err(Error::invalid(format!(
                "unknown pose `{other}` (expected flat, pocket_tilt, shirt_vertical or custom)"
            ))),
        }
    }
}

/// Constant phone-frame offset added to the magnetometer during `[t_start, t_end)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagDisturbance {
    pub t_start: f64,
    pub t_end: f64,
    pub offset: PhoneVec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkSimConfig {
    /// Initial heading, degrees clockwise from North.
    pub heading_deg: f64,
    /// `(t, heading_deg)`: a turn toward `heading_deg` starting at `t`.
    pub heading_schedule: Vec<(f64, f64)>,
    /// Phone→user rotation.
    pub pose: Quaternion,
    pub duration: f64,
    pub rate: f64,
    pub step_freq: f64,
    pub accel_forward_amp: f64,
    pub accel_lateral_amp: f64,
    pub accel_vertical_amp: f64,
    /// Peak phone yaw oscillation about the vertical at stride frequency (degrees).
    pub yaw_sway_deg: f64,
    pub noise_accel_sigma: f64,
    pub noise_gyro_sigma: f64,
    pub gyro_bias: PhoneVec,
    pub noise_mag_sigma: f64,
    pub mag_disturbances: Vec<MagDisturbance>,
    pub dip_deg: f64,
    pub field_strength: f64,
    pub seed: u64,
}

impl Default for WalkSimConfig {
    fn default() -> Self {
        Self {
            heading_deg: 0.0,
            heading_schedule: Vec::new(),
            pose: Quaternion::identity(),
            duration: 60.0,
            rate: 50.0,
            step_freq: 2.0,
            accel_forward_amp: 1.5,
            accel_lateral_amp: 0.4,
            accel_vertical_amp: 1.2,
            yaw_sway_deg: 5.0,
            noise_accel_sigma: 0.0,
            noise_gyro_sigma: 0.0,
            gyro_bias: PhoneVec::zero(),
            noise_mag_sigma: 0.0,
            mag_disturbances: Vec::new(),
            dip_deg: 45.0,
            field_strength: 50.0,
            seed: 0,
        }
    }
}

impl WalkSimConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v >= 0.0 && v.is_finite();
        if !self.heading_deg.is_finite() {
            return Err(Error::invalid("heading must be finite"));
        }
        if !(self.duration > MIN_DURATION && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration must exceed {MIN_DURATION} s")));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::invalid("rate must be positive"));
        }
        if !(self.step_freq > 0.0 && self.step_freq.is_finite()) {
            return Err(Error::invalid("step frequency must be positive"));
        }
        for (name, v) in [
            ("accel_forward_amp", self.accel_forward_amp),
            ("accel_lateral_amp", self.accel_lateral_amp),
            ("accel_vertical_amp", self.accel_vertical_amp),
            ("yaw_sway_deg", self.yaw_sway_deg),
            ("noise_accel_sigma", self.noise_accel_sigma),
            ("noise_gyro_sigma", self.noise_gyro_sigma),
            ("noise_mag_sigma", self.noise_mag_sigma),
        ] {
            if !finite_nonneg(v) {
                return Err(Error::invalid(format!("{name} must be finite and non-negative")));
            }
        }
        if self.accel_forward_amp > 0.0 && self.accel_forward_amp <= self.accel_lateral_amp {
            return Err(Error::invalid("forward amplitude must exceed lateral amplitude"));
        }
        if !(self.field_strength > 0.0 && self.field_strength.is_finite()) {
            return Err(Error::invalid("field strength must be positive"));
        }
        if !(self.dip_deg.abs() < 90.0) {
            return Err(Error::invalid("dip must lie strictly between -90 and 90 degrees"));
        }
        if !self.gyro_bias.is_finite() {
            return Err(Error::invalid("gyro bias must be finite"));
        }
        let q = self.pose;
        if !q.is_finite() || (q.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("pose must be a unit quaternion"));
        }
        let mut last = f64::NEG_INFINITY;
        for &(t, h) in &self.heading_schedule {
            if !(t.is_finite() && h.is_finite()) || t < last + TURN_DURATION {
                return Err(Error::invalid("turns must be finite, ordered and at least 1 s apart"));
            }
            if t < 0.0 {
                return Err(Error::invalid("turn times must be non-negative"));
            }
            last = t;
        }
        for d in &self.mag_disturbances {
            if !(d.t_start.is_finite() && d.t_end.is_finite() && d.t_start < d.t_end && d.offset.is_finite()) {
                return Err(Error::invalid("disturbance needs t_start < t_end and a finite offset"));
            }
        }
        Ok(())
    }

    fn sample_count(&self) -> usize {
        (self.duration * self.rate).round() as usize
    }

    /// Walker heading (rad, unwrapped) and its rate at `t`.
    fn heading_at(&self, t: f64) -> (f64, f64) {
        let mut psi = self.heading_deg.to_radians();
        let mut rate = 0.0;
        for &(t_turn, target) in &self.heading_schedule {
            if t < t_turn {
                break;
            }
            let delta = wrap_180(target - psi.to_degrees()).to_radians();
            let u = (t - t_turn) / TURN_DURATION;
            if u >= 1.0 {
                psi += delta;
            } else {
                psi += delta * 0.5 * (1.0 - (PI * u).cos());
                rate = delta * 0.5 * PI * (PI * u).sin() / TURN_DURATION;
            }
        }
        (psi, rate)
    }

    fn truth(&self, t_end: f64) -> Result<GroundTruth> {
        let mut segments = Vec::new();
        let mut start = 0.0;
        let mut heading = self.heading_deg;
        for &(t_turn, target) in &self.heading_schedule {
            let boundary = t_turn + 0.5 * TURN_DURATION;
            if boundary >= t_end {
                break;
            }
            if boundary > start {
                segments.push(TruthSegment { t_start: start, t_end: boundary, heading: HeadingAngle::new(heading) });
                start = boundary;
            }
            heading = target;
        }
        segments.push(TruthSegment { t_start: start, t_end, heading: HeadingAngle::new(heading) });
        GroundTruth::new(segments)
    }
}

/// Simulator output plus per-sample ground truth for debugging.
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub trace: ImuTrace,
    pub truth: GroundTruth,
    /// True phone→world rotation per sample.
    pub true_q: Vec<Quaternion>,
    /// True world-frame linear acceleration per sample.
    pub true_linear: Vec<WorldVec>,
}

/// Gyro bias of `rate_rad_s` about the world vertical, expressed in the phone
/// frame for a phone held in `pose`.
pub fn vertical_gyro_bias(pose: &Quaternion, rate_rad_s: f64) -> Result<PhoneVec> {
    let up_in_phone = pose.conjugate().rotate_vector(PhoneVec::new(0.0, 0.0, 1.0))?;
    Ok(up_in_phone * rate_rad_s)
}

fn yaw_quaternion(yaw: f64) -> Quaternion {
    // Clockwise about Up.
    let (s, c) = (-0.5 * yaw).sin_cos();
    Quaternion::new(c, 0.0, 0.0, s)
}

pub fn generate_trace(cfg: &WalkSimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let pose = cfg.pose.normalize()?;
    let n = cfg.sample_count();
    if n < 2 {
        return Err(Error::invalid("configuration yields fewer than 2 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut noise = |sigma: f64| -> PhoneVec {
        let v = PhoneVec::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        v * sigma
    };

    let (sd, cd) = cfg.dip_deg.to_radians().sin_cos();
    let field = WorldVec::new(0.0, -cfg.field_strength * cd, cfg.field_strength * sd);
    let up = WorldVec::new(0.0, 0.0, 1.0);
    let up_in_phone = pose.conjugate().rotate_unchecked(PhoneVec::new(0.0, 0.0, 1.0));
    let f = cfg.step_freq;
    let sway_amp = cfg.yaw_sway_deg.to_radians();
    let sway_w = PI * f;

    let mut samples = Vec::with_capacity(n);
    let mut true_q = Vec::with_capacity(n);
    let mut true_linear = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / cfg.rate;
        let (psi, psi_dot) = cfg.heading_at(t);
        let sway = sway_amp * (sway_w * t).sin();
        let sway_dot = sway_amp * sway_w * (sway_w * t).cos();

        let (sp, cp) = psi.sin_cos();
        let forward = WorldVec::new(sp, cp, 0.0);
        let right = WorldVec::new(cp, -sp, 0.0);
        let phase = 2.0 * PI * f * t;
        let linear = forward * (cfg.accel_forward_amp * phase.sin())
            + right * (cfg.accel_lateral_amp * (0.5 * phase).sin())
            + up * (cfg.accel_vertical_amp * phase.sin());

        let q = yaw_quaternion(psi + sway) * pose;
        let to_phone = q.conjugate();
        let specific: WorldVec = up * GRAVITY + linear;
        let accel = to_phone.rotate_unchecked(specific).into_frame::<crate::geom::Phone>();
        let gyro = up_in_phone * (-(psi_dot + sway_dot));
        let mut mag = to_phone.rotate_unchecked(field).into_frame::<crate::geom::Phone>();
        for d in &cfg.mag_disturbances {
            if t >= d.t_start && t < d.t_end {
                mag += d.offset;
            }
        }

        samples.push(ImuSample {
            t,
            accel: accel + noise(cfg.noise_accel_sigma),
            gyro: gyro + cfg.gyro_bias + noise(cfg.noise_gyro_sigma),
            mag: mag + noise(cfg.noise_mag_sigma),
        });
        true_q.push(q);
        true_linear.push(linear);
    }
    let t_end = samples[n - 1].t;
    let trace = ImuTrace::with_rate(samples, cfg.rate)?;
    let truth = cfg.truth(t_end)?;
    Ok(SimOutput { trace, truth, true_q, true_linear })
}

pub const SIM_DEBUG_HEADER: &str = "t,qw,qx,qy,qz,l_east,l_north,l_up";

/// Per-sample true orientation and world-frame linear acceleration.
pub fn write_sim_debug<W: Write>(out: &SimOutput, mut w: W) -> Result<()> {
    writeln!(w, "{SIM_DEBUG_HEADER}")?;
    for ((s, q), l) in out.trace.samples().iter().zip(&out.true_q).zip(&out.true_linear) {
        writeln!(w, "{},{},{},{},{},{},{},{}", s.t, q.w, q.x, q.y, q.z, l.east(), l.north(), l.up())?;
    }
    w.flush()?;
    Ok(())
}
