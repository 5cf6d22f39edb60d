//! Gravity tracking, compass gating and per-sample orientation.
//!
//! Gravity is re-referenced from the accelerometer whenever the total
//! acceleration has magnitude close to `g`, and carried between references by
//! rotating it against the gyroscope. Pitch and roll follow from gravity, yaw
//! from the tilt-compensated magnetometer. A gyro-integrated yaw is pulled
//! toward the compass only while the two yaw rates are strongly correlated.

use std::collections::VecDeque;
use std::io::Write;

use crate::error::{Error, Result};
use crate::filter::Ema;
use crate::geom::{
    euler_from_gravity, quaternion_from_euler, wrap_pi, wrap_two_pi, yaw_from_magnetics, EulerAngles, PhoneVec,
    Quaternion, GRAVITY,
};
use crate::trace::{ImuSample, ImuTrace};

/// Largest gyro integration step; longer gaps are split.
const MAX_STEP: f64 = 0.1;
const MIN_RELIABILITY_SAMPLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionConfig {
    /// Accept a sample as a gravity reference when `|‖a‖ − g|` is at most this (m/s²).
    pub gravity_tolerance: f64,
    /// Length of the yaw-rate correlation window (s).
    pub reliability_window: f64,
    /// Minimum Pearson correlation for the compass to count as reliable.
    /// Values above 1 disable the compass correction.
    pub reliability_threshold: f64,
    /// Fraction of the compass–gyro yaw difference removed per reliable sample.
    pub yaw_blend: f64,
    /// Fraction of the accelerometer–gravity difference applied at a reference
    /// sample. 1 replaces the tracked gravity with the reading.
    pub gravity_gain: f64,
    /// EMA factor applied (twice) to both yaw signals before differencing them
    /// into rates for the correlation test.
    pub rate_smoothing: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            gravity_tolerance: 0.3,
            reliability_window: 1.0,
            reliability_threshold: 0.8,
            yaw_blend: 0.02,
            gravity_gain: 1.0,
            rate_smoothing: 0.1,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let frac = |v: f64| (0.0..=1.0).contains(&v);
        if !pos(self.gravity_tolerance) {
            return Err(Error::invalid("gravity_tolerance must be positive"));
        }
        if !pos(self.reliability_window) {
            return Err(Error::invalid("reliability_window must be positive"));
        }
        if !(self.reliability_threshold >= 0.0 && self.reliability_threshold.is_finite()) {
            return Err(Error::invalid("reliability_threshold must be non-negative"));
        }
        if !frac(self.yaw_blend) {
            return Err(Error::invalid("yaw_blend must be in [0, 1]"));
        }
        if !(self.gravity_gain > 0.0 && self.gravity_gain <= 1.0) {
            return Err(Error::invalid("gravity_gain must be in (0, 1]"));
        }
        if !(self.rate_smoothing > 0.0 && self.rate_smoothing <= 1.0) {
            return Err(Error::invalid("rate_smoothing must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Fused orientation at one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientationState {
    pub t: f64,
    /// Tracked gravity reaction in the phone frame (points up).
    pub gravity: PhoneVec,
    /// Phone→world rotation.
    pub q: Quaternion,
    pub euler: EulerAngles,
    /// `accel − gravity`.
    pub linear: PhoneVec,
    pub compass_reliable: bool,
}

/// True iff the accelerometer magnitude is within tolerance of `g`.
pub fn detect_gravity_reference(sample: &ImuSample, cfg: &FusionConfig) -> bool {
    (sample.accel.norm() - GRAVITY).abs() <= cfg.gravity_tolerance
}

/// Rotates `prev` by the inverse of the body rotation `gyro·dt`.
pub fn propagate_gravity(prev: PhoneVec, gyro: PhoneVec, dt: f64) -> Result<PhoneVec> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(Error::invalid(format!("dt {dt} is outside (0, {MAX_STEP}]")));
    }
    if !prev.is_finite() || !gyro.is_finite() {
        return Err(Error::invalid("gravity and gyro must be finite"));
    }
    let rate = gyro.norm();
    if rate * dt < 1e-15 {
        return Ok(prev);
    }
    let q = Quaternion::from_axis_angle(gyro, -rate * dt)?;
    Ok(q.rotate_unchecked(prev))
}

/// Pearson correlation of the two yaw-rate series against the threshold.
///
/// A constant series has no defined correlation and reports `false`.
pub fn compass_reliability(compass_yaw_rate: &[f64], gyro_yaw_rate: &[f64], cfg: &FusionConfig) -> Result<bool> {
    if compass_yaw_rate.len() != gyro_yaw_rate.len() {
        return Err(Error::invalid(format!(
            "yaw-rate series differ in length ({} vs {})",
            compass_yaw_rate.len(),
            gyro_yaw_rate.len()
        )));
    }
    if compass_yaw_rate.len() < MIN_RELIABILITY_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least {MIN_RELIABILITY_SAMPLES} samples, got {}",
            compass_yaw_rate.len()
        )));
    }
    Ok(pearson(compass_yaw_rate.iter().copied().zip(gyro_yaw_rate.iter().copied()))
        .is_some_and(|r| r >= cfg.reliability_threshold))
}

fn pearson(pairs: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let (mut n, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs.clone() {
        n += 1.0;
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let scale = (mx.abs() + my.abs() + 1.0) * 1e-12;
    if sxx.sqrt() <= scale * n.sqrt() || syy.sqrt() <= scale * n.sqrt() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    r.is_finite().then_some(r)
}

/// Two cascaded EMAs followed by a finite difference.
#[derive(Clone, Debug)]
struct RateEstimator {
    stage1: Ema,
    stage2: Ema,
    last: Option<f64>,
}

impl RateEstimator {
    fn new(alpha: f64) -> Self {
        Self { stage1: Ema::new(alpha), stage2: Ema::new(alpha), last: None }
    }

    fn update(&mut self, x: f64, dt: f64) -> Option<f64> {
        let s = self.stage2.update(self.stage1.update(x));
        let rate = self.last.map(|prev| (s - prev) / dt);
        self.last = Some(s);
        rate
    }
}

/// Streaming fusion over samples in time order.
#[derive(Clone, Debug)]
pub struct Fuser {
    cfg: FusionConfig,
    index: usize,
    last: Option<Previous>,
    gamma_gyro: f64,
    gamma_gyro_raw: f64,
    gamma_mag_unwrapped: f64,
    compass_rate: RateEstimator,
    gyro_rate: RateEstimator,
    rates: VecDeque<(f64, f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
struct Previous {
    t: f64,
    gyro: PhoneVec,
    gravity: PhoneVec,
    gamma_mag: f64,
}

impl Fuser {
    pub fn new(cfg: FusionConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            index: 0,
            last: None,
            gamma_gyro: 0.0,
            gamma_gyro_raw: 0.0,
            gamma_mag_unwrapped: 0.0,
            compass_rate: RateEstimator::new(cfg.rate_smoothing),
            gyro_rate: RateEstimator::new(cfg.rate_smoothing),
            rates: VecDeque::new(),
        })
    }

    pub fn config(&self) -> &FusionConfig {
        &self.cfg
    }

    /// Consumes the next sample. Errors carry the sample index.
    pub fn push(&mut self, sample: &ImuSample) -> Result<OrientationState> {
        let index = self.index;
        let state = self.step(sample).map_err(|e| Error::at_sample(index, e))?;
        self.index += 1;
        Ok(state)
    }

    fn step(&mut self, s: &ImuSample) -> Result<OrientationState> {
        if !(s.accel.is_finite() && s.gyro.is_finite() && s.mag.is_finite() && s.t.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        let reference = detect_gravity_reference(s, &self.cfg);
        let Some(prev) = self.last else {
            return self.first(s, reference);
        };
        let dt = s.t - prev.t;
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("timestamp {} does not advance", s.t)));
        }

        let omega = (prev.gyro + s.gyro) * 0.5;
        let steps = (dt / MAX_STEP).ceil().max(1.0);
        let h = dt / steps;
        let mut gravity = prev.gravity;
        for _ in 0..steps as usize {
            gravity = propagate_gravity(gravity, omega, h)?;
        }
        if reference {
            gravity += (s.accel - gravity) * self.cfg.gravity_gain;
        }

        let up = gravity.normalize()?;
        let d_gamma = -omega.dot(up) * dt;
        let (alpha, beta) = euler_from_gravity(gravity)?;
        let gamma_mag = yaw_from_magnetics(s.mag, alpha, beta)?;

        self.gamma_gyro_raw += d_gamma;
        self.gamma_mag_unwrapped += wrap_pi(gamma_mag - prev.gamma_mag);
        let compass_rate = self.compass_rate.update(self.gamma_mag_unwrapped, dt);
        let gyro_rate = self.gyro_rate.update(self.gamma_gyro_raw, dt);
        if let (Some(c), Some(g)) = (compass_rate, gyro_rate) {
            self.rates.push_back((s.t, c, g));
        }
        while self.rates.front().is_some_and(|&(t, _, _)| t <= s.t - self.cfg.reliability_window) {
            self.rates.pop_front();
        }
        let reliable = self.rates.len() >= MIN_RELIABILITY_SAMPLES
            && pearson(self.rates.iter().map(|&(_, c, g)| (c, g))).is_some_and(|r| r >= self.cfg.reliability_threshold);

        self.gamma_gyro = wrap_two_pi(self.gamma_gyro + d_gamma);
        if reliable {
            self.gamma_gyro = wrap_two_pi(self.gamma_gyro + self.cfg.yaw_blend * wrap_pi(gamma_mag - self.gamma_gyro));
        }

        self.last = Some(Previous { t: s.t, gyro: s.gyro, gravity, gamma_mag });
        Ok(self.state(s, gravity, alpha, beta, reliable))
    }

    fn first(&mut self, s: &ImuSample, reference: bool) -> Result<OrientationState> {
        let norm = s.accel.norm();
        if !(norm > 1e-9) {
            return Err(Error::invalid("first accelerometer reading is zero; cannot seed gravity"));
        }
        let gravity = if reference { s.accel } else { s.accel * (GRAVITY / norm) };
        let (alpha, beta) = euler_from_gravity(gravity)?;
        let gamma_mag = yaw_from_magnetics(s.mag, alpha, beta)?;
        self.gamma_gyro = gamma_mag;
        self.gamma_gyro_raw = 0.0;
        self.gamma_mag_unwrapped = gamma_mag;
        self.compass_rate.update(gamma_mag, 1.0);
        self.gyro_rate.update(0.0, 1.0);
        self.last = Some(Previous { t: s.t, gyro: s.gyro, gravity, gamma_mag });
        Ok(self.state(s, gravity, alpha, beta, false))
    }

    fn state(&self, s: &ImuSample, gravity: PhoneVec, alpha: f64, beta: f64, reliable: bool) -> OrientationState {
        let euler = EulerAngles::new(alpha, beta, self.gamma_gyro);
        OrientationState {
            t: s.t,
            gravity,
            q: quaternion_from_euler(&euler).conjugate(),
            euler,
            linear: s.accel - gravity,
            compass_reliable: reliable,
        }
    }
}

/// Runs [`Fuser`] over a whole trace.
pub fn fuse(trace: &ImuTrace, cfg: &FusionConfig) -> Result<Vec<OrientationState>> {
    let mut fuser = Fuser::new(*cfg)?;
    trace.samples().iter().map(|s| fuser.push(s)).collect()
}

pub const FUSION_DUMP_HEADER: &str = "t,gx,gy,gz,alpha_deg,beta_deg,gamma_deg,lx,ly,lz,reliable";

/// Debug dump of fused states, one row per sample.
pub fn write_fusion_dump<W: Write>(states: &[OrientationState], mut out: W) -> Result<()> {
    writeln!(out, "{FUSION_DUMP_HEADER}")?;
    for s in states {
        let (a, b, g) = s.euler.to_degrees();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.gravity.x,
            s.gravity.y,
            s.gravity.z,
            a,
            b,
            g,
            s.linear.x,
            s.linear.y,
            s.linear.z,
            u8::from(s.compass_reliable)
        )?;
    }
    out.flush()?;
    Ok(())
}
