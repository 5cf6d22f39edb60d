//! C ABI over `pedheading`.
//!
//! Every function returns a [`PhStatus`]. On failure the thread's last error
//! message is available from [`ph_last_error_message`]. Handles are opaque and
//! must be released with the matching `*_free` function.

#![allow(clippy::missing_safety_doc, clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pedheading::eval::{score, turn_latency};
use pedheading::geom::{euler_from_gravity, yaw_from_magnetics, EulerAngles, HeadingAngle, PhoneVec, Quaternion};
use pedheading::heading::{parse_estimates, write_estimates};
use pedheading::sim::{vertical_gyro_bias, MagDisturbance};
use pedheading::trace::{write_ground_truth, write_trace};
use pedheading::{
    estimate_headings, fuse, generate_trace, parse_ground_truth, parse_trace, quaternion_from_euler, resample, Error,
    FilterConfig, FusionConfig, GroundTruth, HeadingEstimate, ImuSample, ImuTrace, PosePreset, WalkSimConfig,
    WindowConfig,
};

/// Result code of every `ph_*` call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DegenerateField = 3,
    InsufficientData = 4,
    Parse = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Phone orientation relative to the walker.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhPose {
    Flat = 0,
    PocketTilt = 1,
    ShirtVertical = 2,
    /// Use `PhSimConfig::pose_quat`.
    Custom = 3,
}

/// Owned IMU trace.
pub struct PhTrace {
    inner: ImuTrace,
}

/// Owned ground-truth heading schedule.
pub struct PhGroundTruth {
    inner: GroundTruth,
}

/// Owned list of windowed heading estimates.
pub struct PhEstimates {
    inner: Vec<HeadingEstimate>,
}

/// One IMU reading. Vectors are phone-frame (x, y, z).
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhImuSample {
    pub t: f64,
    /// m/s².
    pub accel: [f64; 3],
    /// rad/s.
    pub gyro: [f64; 3],
    /// µT.
    pub mag: [f64; 3],
}

/// One window's estimate. Angles are degrees clockwise from North.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhHeadingEstimate {
    pub t_center: f64,
    pub theta_deg: f64,
    pub axis_deg: f64,
    pub confidence: f64,
    pub gamma_deg: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhTurn {
    pub t: f64,
    pub heading_deg: f64,
}

/// Constant phone-frame offset (µT) added to the magnetometer over `[t_start, t_end)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhMagDisturbance {
    pub t_start: f64,
    pub t_end: f64,
    pub offset: [f64; 3],
}

/// Walk simulator settings. Fill with `ph_sim_config_default` first.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PhSimConfig {
    pub heading_deg: f64,
    pub pose: PhPose,
    /// Phone→user unit quaternion (w, x, y, z); read only for `PH_POSE_CUSTOM`.
    pub pose_quat: [f64; 4],
    pub duration: f64,
    pub rate: f64,
    pub step_freq: f64,
    pub accel_forward_amp: f64,
    pub accel_lateral_amp: f64,
    pub accel_vertical_amp: f64,
    pub yaw_sway_deg: f64,
    pub noise_accel_sigma: f64,
    pub noise_gyro_sigma: f64,
    pub noise_mag_sigma: f64,
    /// Constant phone-frame gyro bias, rad/s.
    pub gyro_bias: [f64; 3],
    /// Extra bias about the world vertical, deg/s.
    pub yaw_bias_deg_s: f64,
    pub dip_deg: f64,
    pub field_strength: f64,
    pub seed: u64,
    pub turns: *const PhTurn,
    pub n_turns: usize,
    pub disturbances: *const PhMagDisturbance,
    pub n_disturbances: usize,
}

/// Fusion and windowing settings. Fill with `ph_estimate_config_default` first.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhEstimateConfig {
    pub window_s: f64,
    pub hop_s: f64,
    pub delta: f64,
    pub min_energy: f64,
    pub anisotropy_min: f64,
    pub gravity_tolerance: f64,
    pub gravity_gain: f64,
    pub reliability_window: f64,
    pub reliability_threshold: f64,
    pub yaw_blend: f64,
    pub rate_smoothing: f64,
    /// Resample to this rate (Hz) before fusion; 0 keeps the input grid.
    pub resample_hz: f64,
}

/// Heading error percentiles in degrees.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhErrorSummary {
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhLatency {
    /// Mean settle time over all turns, NaN when the truth has no turns.
    pub mean_settle_s: f64,
    pub n_turns: usize,
    pub n_unsettled: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PhStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> PhStatus {
    match e {
        Error::InvalidInput(_) => PhStatus::InvalidInput,
        Error::DegenerateField => PhStatus::DegenerateField,
        Error::InsufficientData(_) => PhStatus::InsufficientData,
        Error::Parse { .. } => PhStatus::Parse,
        Error::AtSample { source, .. } => status_of(source),
        Error::Io(_) => PhStatus::Io,
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PhStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PhStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            PhStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PhStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, n))
    }
}

unsafe fn array<const N: usize>(p: *const f64, what: &str) -> Result<[f64; N], Failure> {
    Ok(slice(p, N, what)?.try_into().expect("length checked"))
}

unsafe fn write_array<const N: usize>(p: *mut f64, v: [f64; N], what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    std::slice::from_raw_parts_mut(p, N).copy_from_slice(&v);
    Ok(())
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    let s = deref(p, "path")?;
    let s =
        CStr::from_ptr(s).to_str().map_err(|_| Failure(PhStatus::InvalidInput, "path is not valid UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

fn open(p: &PathBuf) -> Result<BufReader<File>, Failure> {
    File::open(p).map(BufReader::new).map_err(|e| Failure(PhStatus::Io, format!("{}: {e}", p.display())))
}

fn create(p: &PathBuf, f: impl FnOnce(&mut BufWriter<File>) -> pedheading::Result<()>) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure(PhStatus::Io, format!("{}: {e}", p.display()));
    let mut w = BufWriter::new(File::create(p).map_err(io)?);
    f(&mut w)?;
    w.flush().map_err(io)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ph_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `ph_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ph_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// ---- geometry ----

/// World→phone quaternion for Euler angles in radians, written to `q_out[4]` as (w, x, y, z).
#[no_mangle]
pub unsafe extern "C" fn ph_quaternion_from_euler(alpha: f64, beta: f64, gamma: f64, q_out: *mut f64) -> PhStatus {
    guard(|| {
        let q = quaternion_from_euler(&EulerAngles::new(alpha, beta, gamma));
        write_array(q_out, [q.w, q.x, q.y, q.z], "q_out")?;
        Ok(())
    })
}

/// Rotates `v[3]` by the unit quaternion `q[4]` (w, x, y, z) into `v_out[3]`.
#[no_mangle]
pub unsafe extern "C" fn ph_rotate_vector(q: *const f64, v: *const f64, v_out: *mut f64) -> PhStatus {
    guard(|| {
        let [w, x, y, z] = array::<4>(q, "q")?;
        let r = Quaternion::new(w, x, y, z).rotate_vector(PhoneVec::from_array(array::<3>(v, "v")?))?;
        write_array(v_out, r.to_array(), "v_out")?;
        Ok(())
    })
}

/// Pitch `alpha` and roll `beta` (radians) from a phone-frame gravity reading.
#[no_mangle]
pub unsafe extern "C" fn ph_euler_from_gravity(g: *const f64, alpha_out: *mut f64, beta_out: *mut f64) -> PhStatus {
    guard(|| {
        let (a, b) = euler_from_gravity(PhoneVec::from_array(array::<3>(g, "g")?))?;
        *out(alpha_out, "alpha_out")? = a;
        *out(beta_out, "beta_out")? = b;
        Ok(())
    })
}

/// Tilt-compensated yaw in radians, `[0, 2π)`, clockwise from North.
#[no_mangle]
pub unsafe extern "C" fn ph_yaw_from_magnetics(m: *const f64, alpha: f64, beta: f64, gamma_out: *mut f64) -> PhStatus {
    guard(|| {
        *out(gamma_out, "gamma_out")? = yaw_from_magnetics(PhoneVec::from_array(array::<3>(m, "m")?), alpha, beta)?;
        Ok(())
    })
}

// ---- traces ----

fn to_sample(s: &PhImuSample) -> ImuSample {
    ImuSample {
        t: s.t,
        accel: PhoneVec::from_array(s.accel),
        gyro: PhoneVec::from_array(s.gyro),
        mag: PhoneVec::from_array(s.mag),
    }
}

/// Builds a trace from `n` samples with strictly increasing timestamps.
#[no_mangle]
pub unsafe extern "C" fn ph_trace_from_samples(
    samples: *const PhImuSample,
    n: usize,
    trace_out: *mut *mut PhTrace,
) -> PhStatus {
    guard(|| {
        let slot = out(trace_out, "trace_out")?;
        let inner = ImuTrace::new(slice(samples, n, "samples")?.iter().map(to_sample).collect())?;
        *slot = boxed(PhTrace { inner });
        Ok(())
    })
}

/// Reads a trace CSV (`t,ax,ay,az,wx,wy,wz,mx,my,mz`).
#[no_mangle]
pub unsafe extern "C" fn ph_trace_read_csv(path_utf8: *const c_char, trace_out: *mut *mut PhTrace) -> PhStatus {
    guard(|| {
        let slot = out(trace_out, "trace_out")?;
        let inner = parse_trace(open(&path(path_utf8)?)?)?;
        *slot = boxed(PhTrace { inner });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_trace_write_csv(trace: *const PhTrace, path_utf8: *const c_char) -> PhStatus {
    guard(|| {
        let t = deref(trace, "trace")?;
        create(&path(path_utf8)?, |w| write_trace(&t.inner, w))
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_trace_len(trace: *const PhTrace, len_out: *mut usize) -> PhStatus {
    guard(|| {
        *out(len_out, "len_out")? = deref(trace, "trace")?.inner.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_trace_get(trace: *const PhTrace, index: usize, sample_out: *mut PhImuSample) -> PhStatus {
    guard(|| {
        let t = deref(trace, "trace")?;
        let s = t.inner.samples().get(index).ok_or_else(|| {
            Failure(PhStatus::OutOfRange, format!("index {index} out of range for {} samples", t.inner.len()))
        })?;
        *out(sample_out, "sample_out")? =
            PhImuSample { t: s.t, accel: s.accel.to_array(), gyro: s.gyro.to_array(), mag: s.mag.to_array() };
        Ok(())
    })
}

/// Releases a trace. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ph_trace_free(trace: *mut PhTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

// ---- ground truth ----

#[no_mangle]
pub unsafe extern "C" fn ph_truth_read_csv(path_utf8: *const c_char, truth_out: *mut *mut PhGroundTruth) -> PhStatus {
    guard(|| {
        let slot = out(truth_out, "truth_out")?;
        let inner = parse_ground_truth(open(&path(path_utf8)?)?)?;
        *slot = boxed(PhGroundTruth { inner });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_truth_write_csv(truth: *const PhGroundTruth, path_utf8: *const c_char) -> PhStatus {
    guard(|| {
        let g = deref(truth, "truth")?;
        create(&path(path_utf8)?, |w| write_ground_truth(&g.inner, w))
    })
}

/// True heading (degrees) at time `t`; `PH_STATUS_OUT_OF_RANGE` outside the schedule.
#[no_mangle]
pub unsafe extern "C" fn ph_truth_heading_at(
    truth: *const PhGroundTruth,
    t: f64,
    heading_deg_out: *mut f64,
) -> PhStatus {
    guard(|| {
        let h = deref(truth, "truth")?
            .inner
            .heading_at(t)
            .ok_or_else(|| Failure(PhStatus::OutOfRange, format!("t = {t} is outside the ground truth")))?;
        *out(heading_deg_out, "heading_deg_out")? = h.degrees();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_truth_free(truth: *mut PhGroundTruth) {
    if !truth.is_null() {
        drop(Box::from_raw(truth));
    }
}

// ---- simulation ----

#[no_mangle]
pub unsafe extern "C" fn ph_sim_config_default(cfg_out: *mut PhSimConfig) -> PhStatus {
    guard(|| {
        let d = WalkSimConfig::default();
        *out(cfg_out, "cfg_out")? = PhSimConfig {
            heading_deg: d.heading_deg,
            pose: PhPose::Flat,
            pose_quat: [1.0, 0.0, 0.0, 0.0],
            duration: d.duration,
            rate: d.rate,
            step_freq: d.step_freq,
            accel_forward_amp: d.accel_forward_amp,
            accel_lateral_amp: d.accel_lateral_amp,
            accel_vertical_amp: d.accel_vertical_amp,
            yaw_sway_deg: d.yaw_sway_deg,
            noise_accel_sigma: d.noise_accel_sigma,
            noise_gyro_sigma: d.noise_gyro_sigma,
            noise_mag_sigma: d.noise_mag_sigma,
            gyro_bias: d.gyro_bias.to_array(),
            yaw_bias_deg_s: 0.0,
            dip_deg: d.dip_deg,
            field_strength: d.field_strength,
            seed: d.seed,
            turns: ptr::null(),
            n_turns: 0,
            disturbances: ptr::null(),
            n_disturbances: 0,
        };
        Ok(())
    })
}

unsafe fn sim_config(c: &PhSimConfig) -> Result<WalkSimConfig, Failure> {
    let pose = match c.pose {
        PhPose::Flat => PosePreset::Flat.quaternion(),
        PhPose::PocketTilt => PosePreset::PocketTilt.quaternion(),
        PhPose::ShirtVertical => PosePreset::ShirtVertical.quaternion(),
        PhPose::Custom => {
            let [w, x, y, z] = c.pose_quat;
            let q = Quaternion::new(w, x, y, z);
            if !((q.norm() - 1.0).abs() <= 1e-6) {
                return Err(Failure(
                    PhStatus::InvalidInput,
                    format!("pose_quat must be a unit quaternion (norm {})", q.norm()),
                ));
            }
            q
        }
    };
    let gyro_bias = PhoneVec::from_array(c.gyro_bias) + vertical_gyro_bias(&pose, c.yaw_bias_deg_s.to_radians())?;
    Ok(WalkSimConfig {
        heading_deg: c.heading_deg,
        heading_schedule: slice(c.turns, c.n_turns, "turns")?.iter().map(|t| (t.t, t.heading_deg)).collect(),
        pose,
        duration: c.duration,
        rate: c.rate,
        step_freq: c.step_freq,
        accel_forward_amp: c.accel_forward_amp,
        accel_lateral_amp: c.accel_lateral_amp,
        accel_vertical_amp: c.accel_vertical_amp,
        yaw_sway_deg: c.yaw_sway_deg,
        noise_accel_sigma: c.noise_accel_sigma,
        noise_gyro_sigma: c.noise_gyro_sigma,
        gyro_bias,
        noise_mag_sigma: c.noise_mag_sigma,
        mag_disturbances: slice(c.disturbances, c.n_disturbances, "disturbances")?
            .iter()
            .map(|d| MagDisturbance { t_start: d.t_start, t_end: d.t_end, offset: PhoneVec::from_array(d.offset) })
            .collect(),
        dip_deg: c.dip_deg,
        field_strength: c.field_strength,
        seed: c.seed,
    })
}

/// Simulates a walk. `truth_out` may be NULL when the schedule is not needed.
#[no_mangle]
pub unsafe extern "C" fn ph_simulate(
    cfg: *const PhSimConfig,
    trace_out: *mut *mut PhTrace,
    truth_out: *mut *mut PhGroundTruth,
) -> PhStatus {
    guard(|| {
        let slot = out(trace_out, "trace_out")?;
        let sim = generate_trace(&sim_config(deref(cfg, "cfg")?)?)?;
        *slot = boxed(PhTrace { inner: sim.trace });
        if let Some(t) = truth_out.as_mut() {
            *t = boxed(PhGroundTruth { inner: sim.truth });
        }
        Ok(())
    })
}

// ---- estimation ----

#[no_mangle]
pub unsafe extern "C" fn ph_estimate_config_default(cfg_out: *mut PhEstimateConfig) -> PhStatus {
    guard(|| {
        let (f, w) = (FusionConfig::default(), WindowConfig::default());
        *out(cfg_out, "cfg_out")? = PhEstimateConfig {
            window_s: w.omega,
            hop_s: w.hop,
            delta: FilterConfig::default().delta(),
            min_energy: w.min_energy,
            anisotropy_min: w.anisotropy_min,
            gravity_tolerance: f.gravity_tolerance,
            gravity_gain: f.gravity_gain,
            reliability_window: f.reliability_window,
            reliability_threshold: f.reliability_threshold,
            yaw_blend: f.yaw_blend,
            rate_smoothing: f.rate_smoothing,
            resample_hz: 0.0,
        };
        Ok(())
    })
}

/// Runs orientation fusion and windowed heading estimation over a trace.
#[no_mangle]
pub unsafe extern "C" fn ph_estimate(
    trace: *const PhTrace,
    cfg: *const PhEstimateConfig,
    estimates_out: *mut *mut PhEstimates,
) -> PhStatus {
    guard(|| {
        let t = deref(trace, "trace")?;
        let c = deref(cfg, "cfg")?;
        let slot = out(estimates_out, "estimates_out")?;
        let fusion = FusionConfig {
            gravity_tolerance: c.gravity_tolerance,
            reliability_window: c.reliability_window,
            reliability_threshold: c.reliability_threshold,
            yaw_blend: c.yaw_blend,
            gravity_gain: c.gravity_gain,
            rate_smoothing: c.rate_smoothing,
        };
        fusion.validate()?;
        let filt = FilterConfig::new(c.delta)?;
        let win = WindowConfig {
            omega: c.window_s,
            hop: c.hop_s,
            min_energy: c.min_energy,
            anisotropy_min: c.anisotropy_min,
        };
        win.validate()?;
        let resampled;
        let input = if c.resample_hz == 0.0 {
            &t.inner
        } else {
            resampled = resample(&t.inner, c.resample_hz)?;
            &resampled
        };
        let states = fuse(input, &fusion)?;
        *slot = boxed(PhEstimates { inner: estimate_headings(&states, &filt, &win)? });
        Ok(())
    })
}

/// Reads an estimates CSV as written by `ph_estimates_write_csv`.
#[no_mangle]
pub unsafe extern "C" fn ph_estimates_read_csv(
    path_utf8: *const c_char,
    estimates_out: *mut *mut PhEstimates,
) -> PhStatus {
    guard(|| {
        let slot = out(estimates_out, "estimates_out")?;
        let inner = parse_estimates(open(&path(path_utf8)?)?)?;
        *slot = boxed(PhEstimates { inner });
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_estimates_write_csv(estimates: *const PhEstimates, path_utf8: *const c_char) -> PhStatus {
    guard(|| {
        let e = deref(estimates, "estimates")?;
        create(&path(path_utf8)?, |w| write_estimates(&e.inner, w))
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_estimates_len(estimates: *const PhEstimates, len_out: *mut usize) -> PhStatus {
    guard(|| {
        *out(len_out, "len_out")? = deref(estimates, "estimates")?.inner.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_estimates_get(
    estimates: *const PhEstimates,
    index: usize,
    estimate_out: *mut PhHeadingEstimate,
) -> PhStatus {
    guard(|| {
        let e = deref(estimates, "estimates")?;
        let h = e.inner.get(index).ok_or_else(|| {
            Failure(PhStatus::OutOfRange, format!("index {index} out of range for {} estimates", e.inner.len()))
        })?;
        *out(estimate_out, "estimate_out")? = PhHeadingEstimate {
            t_center: h.t_center,
            theta_deg: h.theta_u.degrees(),
            axis_deg: h.axis_deg,
            confidence: h.confidence,
            gamma_deg: h.gamma_hint.degrees(),
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ph_estimates_free(estimates: *mut PhEstimates) {
    if !estimates.is_null() {
        drop(Box::from_raw(estimates));
    }
}

// ---- evaluation ----

/// Error percentiles over estimates at least `guard_s` seconds from any turn.
#[no_mangle]
pub unsafe extern "C" fn ph_score(
    estimates: *const PhEstimates,
    truth: *const PhGroundTruth,
    guard_s: f64,
    summary_out: *mut PhErrorSummary,
) -> PhStatus {
    guard(|| {
        let s = score(&deref(estimates, "estimates")?.inner, &deref(truth, "truth")?.inner, guard_s)?;
        *out(summary_out, "summary_out")? = PhErrorSummary { p50: s.p50, p75: s.p75, max: s.max, n: s.n };
        Ok(())
    })
}

/// Settle times after each heading change. `emit_delay_s` is added to every
/// window centre before comparing with the turn time (half the window length
/// for a causal estimator).
#[no_mangle]
pub unsafe extern "C" fn ph_turn_latency(
    estimates: *const PhEstimates,
    truth: *const PhGroundTruth,
    emit_delay_s: f64,
    latency_out: *mut PhLatency,
) -> PhStatus {
    guard(|| {
        let r = turn_latency(&deref(estimates, "estimates")?.inner, &deref(truth, "truth")?.inner, emit_delay_s)?;
        *out(latency_out, "latency_out")? = PhLatency {
            mean_settle_s: r.mean_settle.unwrap_or(f64::NAN),
            n_turns: r.turns.len(),
            n_unsettled: r.turns.iter().filter(|t| !t.settled).count(),
        };
        Ok(())
    })
}

/// Circular distance between two headings in degrees, `[0, 180]`.
#[no_mangle]
pub extern "C" fn ph_heading_difference(a_deg: f64, b_deg: f64) -> f64 {
    pedheading::circular_difference(HeadingAngle::new(a_deg), HeadingAngle::new(b_deg))
}
