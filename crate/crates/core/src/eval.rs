//! Error statistics, latency after turns and the phone-azimuth comparator.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::OrientationState;
use crate::geom::{circular_difference, circular_mean, HeadingAngle};
use crate::heading::{window_ranges, HeadingEstimate, WindowConfig};
use crate::trace::GroundTruth;

/// Error below which an estimate counts as settled after a turn (degrees).
pub const SETTLE_THRESHOLD_DEG: f64 = 20.0;
/// How long the error must stay below the threshold (s).
pub const SETTLE_HOLD_S: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSummary {
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
    pub n: usize,
    /// `(error_deg, cumulative_fraction)`, one point per distinct error.
    pub cdf: Vec<(f64, f64)>,
}

/// Nearest-rank percentile of sorted data: `sorted[⌈p·n⌉ − 1]`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

impl ErrorSummary {
    pub fn from_errors(errors: &[f64]) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::invalid("no errors to summarize"));
        }
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::invalid("errors must be finite and non-negative"));
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut cdf: Vec<(f64, f64)> = Vec::new();
        for (i, &e) in sorted.iter().enumerate() {
            let frac = (i + 1) as f64 / n as f64;
            match cdf.last_mut() {
                Some(last) if last.0 == e => last.1 = frac,
                _ => cdf.push((e, frac)),
            }
        }
        Ok(Self { p50: nearest_rank(&sorted, 0.5), p75: nearest_rank(&sorted, 0.75), max: sorted[n - 1], n, cdf })
    }

    /// `label & p50 & p75 & max`, values rounded to whole degrees.
    pub fn format_row(&self, label: &str) -> String {
        format!("{label} & {:.0} & {:.0} & {:.0}", self.p50, self.p75, self.max)
    }
}

/// Circular error of every estimate that lies inside the truth span and at
/// least `guard_s` away from every heading change.
pub fn heading_errors(estimates: &[HeadingEstimate], truth: &GroundTruth, guard_s: f64) -> Vec<f64> {
    let transitions = truth.transitions();
    estimates
        .iter()
        .filter(|e| transitions.iter().all(|&tr| (e.t_center - tr).abs() >= guard_s))
        .filter_map(|e| truth.heading_at(e.t_center).map(|h| circular_difference(e.theta_u, h)))
        .collect()
}

/// Scores an estimate stream against ground truth. `guard_s` is normally the
/// window length.
pub fn score(estimates: &[HeadingEstimate], truth: &GroundTruth, guard_s: f64) -> Result<ErrorSummary> {
    if !(guard_s >= 0.0 && guard_s.is_finite()) {
        return Err(Error::invalid("guard band must be non-negative"));
    }
    let errors = heading_errors(estimates, truth, guard_s);
    if errors.is_empty() {
        return Err(Error::invalid(format!(
            "no estimates fall inside the ground-truth span [{}, {}] outside the guard bands",
            truth.start(),
            truth.end()
        )));
    }
    ErrorSummary::from_errors(&errors)
}

/// Phone-azimuth comparator: per window, the circular mean of fused yaw.
pub fn azimuth_baseline(states: &[OrientationState], win: &WindowConfig) -> Result<Vec<HeadingEstimate>> {
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let mut out = Vec::new();
    let mut prev = None;
    for (start, lo, hi) in window_ranges(&times, win)? {
        let mean = circular_mean(states[lo..hi].iter().map(|s| HeadingAngle::from_radians(s.euler.gamma())))
            .or(prev)
            .unwrap_or_default();
        prev = Some(mean);
        out.push(HeadingEstimate {
            t_center: start + 0.5 * win.omega,
            theta_u: mean,
            axis_deg: mean.degrees() % 180.0,
            confidence: 1.0,
            gamma_hint: mean,
        });
    }
    Ok(out)
}

/// Comparator from an estimate stream's own `gamma_hint` column.
pub fn baseline_from_hints(estimates: &[HeadingEstimate]) -> Vec<HeadingEstimate> {
    estimates
        .iter()
        .map(|e| HeadingEstimate {
            theta_u: e.gamma_hint,
            axis_deg: e.gamma_hint.degrees() % 180.0,
            confidence: 1.0,
            ..*e
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TurnLatency {
    pub t_turn: f64,
    pub settle_time_s: f64,
    /// False when the estimate never settled; `settle_time_s` then runs to the
    /// end of the estimates.
    pub settled: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatencyReport {
    pub turns: Vec<TurnLatency>,
    /// Mean over all turns, settled or not; `None` without turns.
    pub mean_settle: Option<f64>,
}

/// Time from each heading change until the estimate stays within
/// [`SETTLE_THRESHOLD_DEG`] of the new heading for [`SETTLE_HOLD_S`].
///
/// An estimate becomes available `emit_delay_s` after its `t_center` (half a
/// window for a causal estimator); settle times are measured to that moment.
pub fn turn_latency(estimates: &[HeadingEstimate], truth: &GroundTruth, emit_delay_s: f64) -> Result<LatencyReport> {
    if !(emit_delay_s >= 0.0 && emit_delay_s.is_finite()) {
        return Err(Error::invalid("emit delay must be non-negative"));
    }
    let transitions = truth.transitions();
    let emitted: Vec<(f64, HeadingAngle)> = estimates.iter().map(|e| (e.t_center + emit_delay_s, e.theta_u)).collect();
    let end = emitted.last().map_or(truth.end(), |e| e.0);

    let mut turns = Vec::with_capacity(transitions.len());
    for (k, &tr) in transitions.iter().enumerate() {
        let next = transitions.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let target =
            truth.heading_at(tr + 1e-9).ok_or_else(|| Error::invalid("transition outside the ground-truth span"))?;
        let candidates: Vec<&(f64, HeadingAngle)> = emitted.iter().filter(|e| e.0 >= tr && e.0 < next).collect();
        let ok = |e: &(f64, HeadingAngle)| circular_difference(e.1, target) < SETTLE_THRESHOLD_DEG;
        let settled_at = candidates.iter().enumerate().find_map(|(i, c)| {
            let hold_end = c.0 + SETTLE_HOLD_S;
            let held = candidates[i..].iter().take_while(|d| d.0 <= hold_end).all(|d| ok(d));
            held.then_some(c.0)
        });
        turns.push(match settled_at {
            Some(t) => TurnLatency { t_turn: tr, settle_time_s: t - tr, settled: true },
            None => TurnLatency { t_turn: tr, settle_time_s: (end.min(next) - tr).max(0.0), settled: false },
        });
    }
    let mean_settle =
        (!turns.is_empty()).then(|| turns.iter().map(|t| t.settle_time_s).sum::<f64>() / turns.len() as f64);
    Ok(LatencyReport { turns, mean_settle })
}

/// Summary JSON record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub estimator: String,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
    pub n: usize,
    pub mean_settle_s: Option<f64>,
}

impl SummaryRecord {
    pub fn new(estimator: &str, summary: &ErrorSummary, latency: Option<&LatencyReport>) -> Self {
        Self {
            estimator: estimator.to_string(),
            p50: summary.p50,
            p75: summary.p75,
            max: summary.max,
            n: summary.n,
            mean_settle_s: latency.and_then(|l| l.mean_settle),
        }
    }
}

pub const CDF_HEADER: &str = "error_deg,fraction";

pub fn write_cdf<W: Write>(summary: &ErrorSummary, mut out: W) -> Result<()> {
    writeln!(out, "{CDF_HEADER}")?;
    for (e, f) in &summary.cdf {
        writeln!(out, "{e},{f}")?;
    }
    out.flush()?;
    Ok(())
}
