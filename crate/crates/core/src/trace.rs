//! IMU trace and ground-truth files.
//!
//! Trace CSV: header `t,ax,ay,az,wx,wy,wz,mx,my,mz`, seconds, m/s², rad/s, µT.
//! Ground-truth CSV: header `t_start,t_end,heading_deg`.
//! Values are written with the shortest representation that parses back to
//! the same `f64`, so write-then-parse is lossless.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geom::{HeadingAngle, PhoneVec};

pub const TRACE_HEADER: [&str; 10] = ["t", "ax", "ay", "az", "wx", "wy", "wz", "mx", "my", "mz"];
pub const TRUTH_HEADER: [&str; 3] = ["t_start", "t_end", "heading_deg"];

/// One timestamped 9-axis reading in the phone frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Total acceleration (gravity reaction plus motion), m/s².
    pub accel: PhoneVec,
    /// Angular rate, rad/s.
    pub gyro: PhoneVec,
    /// Magnetic field, µT.
    pub mag: PhoneVec,
}

impl ImuSample {
    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.accel.is_finite() && self.gyro.is_finite() && self.mag.is_finite()
    }
}

/// A validated, time-ordered trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuTrace {
    samples: Vec<ImuSample>,
    nominal_rate: f64,
}

impl ImuTrace {
    /// Validates `samples` and infers the nominal rate from the median gap.
    pub fn new(samples: Vec<ImuSample>) -> Result<Self> {
        validate_samples(&samples)?;
        let rate = 1.0 / median_gap(&samples);
        Ok(Self { samples, nominal_rate: rate })
    }

    /// Like [`ImuTrace::new`], but checks the median gap against `rate` (±20%).
    pub fn with_rate(samples: Vec<ImuSample>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid("sampling rate must be positive"));
        }
        validate_samples(&samples)?;
        let gap = median_gap(&samples);
        if (gap * rate - 1.0).abs() > 0.2 {
            return Err(Error::invalid(format!("median sample gap {gap} s is not within 20% of 1/{rate} Hz")));
        }
        Ok(Self { samples, nominal_rate: rate })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<ImuSample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nominal_rate(&self) -> f64 {
        self.nominal_rate
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Applies `f` to every sample, keeping timestamps and rate.
    pub fn map_samples(mut self, mut f: impl FnMut(&mut ImuSample)) -> Result<Self> {
        let times: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        for s in &mut self.samples {
            f(s);
        }
        if self.samples.iter().zip(&times).any(|(s, &t)| s.t != t) {
            return Err(Error::invalid("map_samples must not change timestamps"));
        }
        validate_samples(&self.samples)?;
        Ok(self)
    }
}

fn validate_samples(samples: &[ImuSample]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("a trace needs at least 2 samples, got {}", samples.len())));
    }
    for (i, s) in samples.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::Parse { row: i + 1, message: "non-finite value".into() });
        }
        if i > 0 && s.t <= samples[i - 1].t {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("timestamp {} is not after the previous one ({})", s.t, samples[i - 1].t),
            });
        }
    }
    Ok(())
}

fn median_gap(samples: &[ImuSample]) -> f64 {
    let mut gaps: Vec<f64> = samples.windows(2).map(|w| w[1].t - w[0].t).collect();
    gaps.sort_by(f64::total_cmp);
    let n = gaps.len();
    if n % 2 == 1 {
        gaps[n / 2]
    } else {
        0.5 * (gaps[n / 2 - 1] + gaps[n / 2])
    }
}

fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = headers.iter().collect();
    if got == expected {
        return Ok(());
    }
    let missing: Vec<&str> = expected.iter().copied().filter(|c| !got.contains(c)).collect();
    let message = if missing.is_empty() {
        format!("header must be exactly `{}`", expected.join(","))
    } else {
        format!("missing columns {:?}; header must be exactly `{}`", missing, expected.join(","))
    };
    Err(Error::Parse { row: 0, message })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input)
}

fn parse_fields<const N: usize>(record: &csv::StringRecord, row: usize) -> Result<[f64; N]> {
    if record.len() != N {
        return Err(Error::Parse { row, message: format!("expected {N} fields, found {}", record.len()) });
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(record.iter()) {
        let v: f64 = field.parse().map_err(|_| Error::Parse { row, message: format!("`{field}` is not a number") })?;
        if !v.is_finite() {
            return Err(Error::Parse { row, message: format!("non-finite value `{field}`") });
        }
        *slot = v;
    }
    Ok(out)
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    Error::Parse { row, message: e.to_string() }
}

/// Parses a trace CSV. Errors name the offending 1-based data row.
pub fn parse_trace<R: Read>(input: R) -> Result<ImuTrace> {
    let mut rdr = csv_reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(e, 0))?.clone();
    check_header(&headers, &TRACE_HEADER)?;

    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(e, row))?;
        let v: [f64; 10] = parse_fields(&rec, row)?;
        if let Some(prev) = samples.last().map(|s: &ImuSample| s.t) {
            if v[0] <= prev {
                return Err(Error::Parse {
                    row,
                    message: format!("timestamp {} is not after the previous one ({prev})", v[0]),
                });
            }
        }
        samples.push(ImuSample {
            t: v[0],
            accel: PhoneVec::new(v[1], v[2], v[3]),
            gyro: PhoneVec::new(v[4], v[5], v[6]),
            mag: PhoneVec::new(v[7], v[8], v[9]),
        });
    }
    ImuTrace::new(samples)
}

pub fn write_trace<W: Write>(trace: &ImuTrace, mut out: W) -> Result<()> {
    writeln!(out, "{}", TRACE_HEADER.join(","))?;
    for s in trace.samples() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.t, s.accel.x, s.accel.y, s.accel.z, s.gyro.x, s.gyro.y, s.gyro.z, s.mag.x, s.mag.y, s.mag.z
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Linearly interpolates every channel onto a uniform grid at `rate` Hz
/// spanning the original time range.
pub fn resample(trace: &ImuTrace, rate: f64) -> Result<ImuTrace> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid("resample rate must be positive"));
    }
    let src = trace.samples();
    let t0 = trace.start();
    let span = trace.end() - t0;
    let n = (span * rate + 1e-9).floor() as usize + 1;
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "resampling a {span} s trace at {rate} Hz yields fewer than 2 samples"
        )));
    }
    let lerp = |a: PhoneVec, b: PhoneVec, w: f64| a + (b - a) * w;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let t = (t0 + k as f64 / rate).min(trace.end());
        while j + 2 < src.len() && src[j + 1].t <= t {
            j += 1;
        }
        let (a, b) = (&src[j], &src[j + 1]);
        let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        out.push(ImuSample {
            t,
            accel: lerp(a.accel, b.accel, w),
            gyro: lerp(a.gyro, b.gyro, w),
            mag: lerp(a.mag, b.mag, w),
        });
    }
    ImuTrace::with_rate(out, rate)
}

/// One straight segment of the ground-truth path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub heading: HeadingAngle,
}

/// Ordered, non-overlapping heading segments.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    segments: Vec<TruthSegment>,
}

impl GroundTruth {
    pub fn new(segments: Vec<TruthSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("ground truth needs at least one segment"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.t_start.is_finite() && s.t_end.is_finite() && s.t_start < s.t_end) {
                return Err(Error::invalid(format!("segment {i}: t_start must precede t_end")));
            }
            if i > 0 && s.t_start < segments[i - 1].t_end {
                return Err(Error::invalid(format!("segment {i} overlaps or precedes segment {}", i - 1)));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[TruthSegment] {
        &self.segments
    }

    pub fn start(&self) -> f64 {
        self.segments[0].t_start
    }

    pub fn end(&self) -> f64 {
        self.segments[self.segments.len() - 1].t_end
    }

    /// Heading at `t`; the final segment includes its end time.
    pub fn heading_at(&self, t: f64) -> Option<HeadingAngle> {
        let last = self.segments.len() - 1;
        self.segments
            .iter()
            .enumerate()
            .find(|(i, s)| t >= s.t_start && (t < s.t_end || (*i == last && t <= s.t_end)))
            .map(|(_, s)| s.heading)
    }

    /// Boundaries between consecutive segments whose headings differ.
    pub fn transitions(&self) -> Vec<f64> {
        self.segments
            .windows(2)
            .filter(|w| w[0].heading != w[1].heading)
            .map(|w| 0.5 * (w[0].t_end + w[1].t_start))
            .collect()
    }
}

pub fn parse_ground_truth<R: Read>(input: R) -> Result<GroundTruth> {
    let mut rdr = csv_reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(e, 0))?.clone();
    check_header(&headers, &TRUTH_HEADER)?;
    let mut segments = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(e, row))?;
        let [t_start, t_end, heading]: [f64; 3] = parse_fields(&rec, row)?;
        if !(0.0..360.0).contains(&heading) {
            return Err(Error::Parse { row, message: format!("heading_deg {heading} is outside [0, 360)") });
        }
        segments.push(TruthSegment { t_start, t_end, heading: HeadingAngle::new(heading) });
    }
    GroundTruth::new(segments)
}

pub fn write_ground_truth<W: Write>(truth: &GroundTruth, mut out: W) -> Result<()> {
    writeln!(out, "{}", TRUTH_HEADER.join(","))?;
    for s in truth.segments() {
        writeln!(out, "{},{},{}", s.t_start, s.t_end, s.heading.degrees())?;
    }
    out.flush()?;
    Ok(())
}
