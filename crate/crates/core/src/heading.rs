//! Windowed principal-axis heading with 180° disambiguation.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::filter::{FilterConfig, LowPass};
use crate::fusion::OrientationState;
use crate::geom::{circular_difference, circular_mean, HeadingAngle, PhoneVec, Quaternion, WorldVec};

pub const ESTIMATE_HEADER: [&str; 5] = ["t_center", "theta_u_deg", "axis_deg", "confidence", "gamma_deg"];
pub const MIN_WINDOW_SAMPLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig {
    /// Window length (s).
    pub omega: f64,
    /// Spacing between window starts (s).
    pub hop: f64,
    /// Total horizontal variance below which a window counts as stationary ((m/s²)²).
    pub min_energy: f64,
    /// Minimum λ₁/λ₂ for a usable motion axis.
    pub anisotropy_min: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { omega: 3.0, hop: 0.5, min_energy: 0.05, anisotropy_min: 1.5 }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("window length must be positive"));
        }
        if !(self.hop > 0.0 && self.hop <= self.omega) {
            return Err(Error::invalid("hop must be in (0, window length]"));
        }
        if !(self.min_energy >= 0.0 && self.min_energy.is_finite()) {
            return Err(Error::invalid("min_energy must be non-negative"));
        }
        if !(self.anisotropy_min >= 1.0 && self.anisotropy_min.is_finite()) {
            return Err(Error::invalid("anisotropy_min must be at least 1"));
        }
        Ok(())
    }
}

/// One window's heading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeadingEstimate {
    pub t_center: f64,
    pub theta_u: HeadingAngle,
    /// Motion axis in `[0, 180)`; equals `theta_u mod 180`.
    pub axis_deg: f64,
    /// `1 − λ₂/λ₁` for usable windows, 0 for held ones.
    pub confidence: f64,
    pub gamma_hint: HeadingAngle,
}

/// Principal axis of a set of horizontal samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcaAxis {
    /// Clockwise from North, `[0, 180)`.
    pub axis_deg: f64,
    /// `λ₁/λ₂` with both floored at 1e-12.
    pub anisotropy: f64,
    /// `λ₁ + λ₂`.
    pub total_variance: f64,
}

/// Rotates phone-frame linear acceleration into the world frame with the
/// phone→world quaternion `q`.
pub fn transform_to_user_frame(linear: PhoneVec, q: &Quaternion) -> Result<WorldVec> {
    Ok(q.rotate_vector(linear)?.into_frame())
}

/// First principal axis of `(north, east)` pairs.
pub fn pca_axis(window: &[(f64, f64)]) -> Result<PcaAxis> {
    if window.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "principal axis needs at least {MIN_WINDOW_SAMPLES} samples, got {}",
            window.len()
        )));
    }
    let n = window.len() as f64;
    let (sn, se) = window.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mn, me) = (sn / n, se / n);
    let (mut cnn, mut cee, mut cne) = (0.0, 0.0, 0.0);
    for &(x, y) in window {
        let (dn, de) = (x - mn, y - me);
        cnn += dn * dn;
        cee += de * de;
        cne += dn * de;
    }
    let (cnn, cee, cne) = (cnn / n, cee / n, cne / n);
    if !(cnn.is_finite() && cee.is_finite() && cne.is_finite()) {
        return Err(Error::invalid("window contains non-finite samples"));
    }

    let axis = 0.5 * (2.0 * cne).atan2(cnn - cee);
    let half_trace = 0.5 * (cnn + cee);
    let radius = (0.25 * (cnn - cee).powi(2) + cne * cne).sqrt();
    let l1 = (half_trace + radius).max(1e-12);
    let l2 = (half_trace - radius).max(1e-12);
    Ok(PcaAxis { axis_deg: axis_mod_180(axis.to_degrees()), anisotropy: l1 / l2, total_variance: cnn + cee })
}

fn axis_mod_180(deg: f64) -> f64 {
    let a = deg.rem_euclid(180.0);
    if a >= 180.0 {
        0.0
    } else {
        a
    }
}

/// Picks `axis` or `axis + 180` by proximity to the phone azimuth.
pub fn resolve_ambiguity(axis_deg: f64, gamma_hint: HeadingAngle, prev: Option<HeadingAngle>) -> HeadingAngle {
    let a = HeadingAngle::new(axis_deg);
    let b = HeadingAngle::new(axis_deg + 180.0);
    let (da, db) = (circular_difference(a, gamma_hint), circular_difference(b, gamma_hint));
    let tie_prefers_b = da == db && prev.is_some_and(|p| circular_difference(b, p) < circular_difference(a, p));
    if db < da || tie_prefers_b {
        b
    } else {
        a
    }
}

/// Half-open sample index ranges `[lo, hi)` and nominal start times of the
/// sliding windows over `times`.
pub(crate) fn window_ranges(times: &[f64], win: &WindowConfig) -> Result<Vec<(f64, usize, usize)>> {
    win.validate()?;
    if times.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 samples".into()));
    }
    let t0 = times[0];
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let span = times[times.len() - 1] - t0 + gaps[gaps.len() / 2];
    let eps = 1e-9 * (1.0 + span.abs());
    if win.omega > span + eps {
        return Err(Error::InsufficientData(format!("trace spans {span} s, shorter than the {} s window", win.omega)));
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    let mut lo = 0usize;
    loop {
        let start = t0 + k as f64 * win.hop;
        let end = start + win.omega;
        if end > t0 + span + eps {
            break;
        }
        while lo < times.len() && times[lo] < start - eps {
            lo += 1;
        }
        let mut hi = lo;
        while hi < times.len() && times[hi] < end - eps {
            hi += 1;
        }
        out.push((start, lo, hi));
        k += 1;
    }
    Ok(out)
}

fn gamma_hint(states: &[OrientationState]) -> HeadingAngle {
    circular_mean(states.iter().map(|s| HeadingAngle::from_radians(s.euler.gamma())))
        .unwrap_or_else(|| HeadingAngle::from_radians(states[states.len() / 2].euler.gamma()))
}

/// Full heading stage: smooth, rotate to world, PCA per window, disambiguate.
pub fn estimate_headings(
    states: &[OrientationState],
    filt: &FilterConfig,
    win: &WindowConfig,
) -> Result<Vec<HeadingEstimate>> {
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let ranges = window_ranges(&times, win)?;

    let mut lp = LowPass::new(*filt);
    let horizontal: Vec<(f64, f64)> = states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = transform_to_user_frame(lp.update(s.linear), &s.q).map_err(|e| Error::at_sample(i, e))?;
            Ok((w.north(), w.east()))
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<HeadingEstimate> = Vec::with_capacity(ranges.len());
    for (start, lo, hi) in ranges {
        let t_center = start + 0.5 * win.omega;
        let prev = out.last().map(|e| e.theta_u);
        if hi - lo < MIN_WINDOW_SAMPLES {
            let hint = if hi > lo { gamma_hint(&states[lo..hi]) } else { prev.unwrap_or_default() };
            out.push(held(t_center, prev.unwrap_or(hint), hint));
            continue;
        }
        let hint = gamma_hint(&states[lo..hi]);
        let pca = pca_axis(&horizontal[lo..hi])?;
        if pca.total_variance < win.min_energy || pca.anisotropy < win.anisotropy_min {
            out.push(held(t_center, prev.unwrap_or(hint), hint));
            continue;
        }
        let theta = resolve_ambiguity(pca.axis_deg, hint, prev);
        out.push(HeadingEstimate {
            t_center,
            theta_u: theta,
            axis_deg: pca.axis_deg,
            confidence: 1.0 - 1.0 / pca.anisotropy,
            gamma_hint: hint,
        });
    }
    Ok(out)
}

fn held(t_center: f64, theta: HeadingAngle, hint: HeadingAngle) -> HeadingEstimate {
    HeadingEstimate {
        t_center,
        theta_u: theta,
        axis_deg: axis_mod_180(theta.degrees()),
        confidence: 0.0,
        gamma_hint: hint,
    }
}

pub fn write_estimates<W: Write>(estimates: &[HeadingEstimate], mut out: W) -> Result<()> {
    writeln!(out, "{}", ESTIMATE_HEADER.join(","))?;
    for e in estimates {
        writeln!(
            out,
            "{},{},{},{},{}",
            e.t_center,
            e.theta_u.degrees(),
            e.axis_deg,
            e.confidence,
            e.gamma_hint.degrees()
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_estimates<R: Read>(input: R) -> Result<Vec<HeadingEstimate>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Parse { row: 0, message: e.to_string() })?;
    if headers.iter().ne(ESTIMATE_HEADER) {
        return Err(Error::Parse {
            row: 0,
            message: format!("header must be exactly `{}`", ESTIMATE_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        let mut v = [0.0; 5];
        if rec.len() != 5 {
            return Err(Error::Parse { row, message: format!("expected 5 fields, found {}", rec.len()) });
        }
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse { row, message: format!("`{field}` is not a finite number") })?;
        }
        out.push(HeadingEstimate {
            t_center: v[0],
            theta_u: HeadingAngle::new(v[1]),
            axis_deg: v[2],
            confidence: v[3],
            gamma_hint: HeadingAngle::new(v[4]),
        });
    }
    Ok(out)
}
