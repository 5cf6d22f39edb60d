use pedheading::eval::{score, ErrorSummary};
use pedheading::filter::{low_pass, FilterConfig};
use pedheading::fusion::{compass_reliability, fuse, FusionConfig};
use pedheading::geom::{circular_difference, euler_from_gravity, yaw_from_magnetics, HeadingAngle, PhoneVec, GRAVITY};
use pedheading::heading::HeadingEstimate;
use pedheading::sim::{generate_trace, vertical_gyro_bias, MagDisturbance, PosePreset, WalkSimConfig};
use pedheading::trace::{parse_trace, resample, write_trace, GroundTruth, TruthSegment};
use proptest::prelude::*;

fn noisy(seed: u64) -> WalkSimConfig {
    WalkSimConfig {
        heading_deg: 123.0,
        pose: PosePreset::PocketTilt.quaternion(),
        noise_accel_sigma: 0.5,
        noise_gyro_sigma: 0.02,
        noise_mag_sigma: 2.0,
        seed,
        ..Default::default()
    }
}

#[test]
fn simulator_trace_round_trips_bit_identically() {
    let out = generate_trace(&noisy(9)).unwrap();
    let mut buf = Vec::new();
    write_trace(&out.trace, &mut buf).unwrap();
    let back = parse_trace(buf.as_slice()).unwrap();
    assert_eq!(back.len(), out.trace.len());
    for (a, b) in back.samples().iter().zip(out.trace.samples()) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        for (x, y) in a
            .accel
            .to_array()
            .iter()
            .chain(&a.gyro.to_array())
            .chain(&a.mag.to_array())
            .zip(b.accel.to_array().iter().chain(&b.gyro.to_array()).chain(&b.mag.to_array()))
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn resample_keeps_monotone_channel_bounds() {
    let out = generate_trace(&WalkSimConfig { duration: 5.0, ..Default::default() }).unwrap();
    let r = resample(&out.trace, 73.0).unwrap();
    assert!(r.start() >= out.trace.start() && r.end() <= out.trace.end());
    let constant = out.trace.clone().map_samples(|s| s.mag = PhoneVec::new(1.0, 2.0, 3.0)).unwrap();
    let rc = resample(&constant, 33.0).unwrap();
    assert!(rc.samples().iter().all(|s| s.mag == PhoneVec::new(1.0, 2.0, 3.0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn resample_stays_within_monotone_bounds(vals in prop::collection::vec(-100.0f64..100.0, 2..40), rate in 1.0f64..200.0) {
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let samples: Vec<_> = sorted.iter().enumerate().map(|(i, &v)| pedheading::ImuSample {
            t: i as f64 * 0.1,
            accel: PhoneVec::new(v, -v, 0.0),
            gyro: PhoneVec::zero(),
            mag: PhoneVec::zero(),
        }).collect();
        let trace = pedheading::ImuTrace::new(samples).unwrap();
        if let Ok(r) = resample(&trace, rate) {
            let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
            let mut prev = f64::NEG_INFINITY;
            for s in r.samples() {
                prop_assert!(s.accel.x >= lo - 1e-12 && s.accel.x <= hi + 1e-12);
                prop_assert!(s.accel.x >= prev - 1e-12);
                prev = s.accel.x;
            }
        }
    }

    #[test]
    fn low_pass_is_a_convex_combination(vals in prop::collection::vec(prop::array::uniform3(-50.0f64..50.0), 1..200),
                                        delta in 0.01f64..=1.0) {
        let stream: Vec<PhoneVec> = vals.iter().map(|&v| PhoneVec::from_array(v)).collect();
        let out = low_pass(&stream, FilterConfig::new(delta).unwrap()).unwrap();
        prop_assert_eq!(out.len(), stream.len());
        for axis in 0..3 {
            let comp: Vec<f64> = stream.iter().map(|v| v.to_array()[axis]).collect();
            let lo = comp.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = comp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for s in &out {
                let x = s.to_array()[axis];
                prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn low_pass_step_response_is_monotone(delta in 0.01f64..=1.0, step in -20.0f64..20.0, n in 2usize..100) {
        let mut stream = vec![PhoneVec::zero()];
        stream.extend(std::iter::repeat_n(PhoneVec::new(step, step, step), n));
        let out = low_pass(&stream, FilterConfig::new(delta).unwrap()).unwrap();
        for w in out.windows(2) {
            prop_assert!((w[1].x - w[0].x) * step.signum() >= -1e-12);
            prop_assert!((step - w[1].x).abs() <= (step - w[0].x).abs() + 1e-12);
        }
    }

    #[test]
    fn score_ignores_common_offset(errs in prop::collection::vec(-60.0f64..60.0, 5..50), offset in 0.0f64..360.0) {
        let truth = |off: f64| GroundTruth::new(vec![TruthSegment { t_start: 0.0, t_end: 100.0, heading: HeadingAngle::new(10.0 + off) }]).unwrap();
        let est = |off: f64| -> Vec<HeadingEstimate> {
            errs.iter().enumerate().map(|(i, e)| {
                let h = HeadingAngle::new(10.0 + e + off);
                HeadingEstimate { t_center: i as f64, theta_u: h, axis_deg: h.degrees() % 180.0, confidence: 1.0, gamma_hint: h }
            }).collect()
        };
        let a = score(&est(0.0), &truth(0.0), 0.0).unwrap();
        let b = score(&est(offset), &truth(offset), 0.0).unwrap();
        prop_assert!((a.p50 - b.p50).abs() < 1e-9 && (a.max - b.max).abs() < 1e-9);
        prop_assert!(a.max <= 180.0 && a.p50 <= a.p75 && a.p75 <= a.max);
        prop_assert_eq!(a.cdf.last().unwrap().1, 1.0);
        prop_assert!(a.cdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
    }
}

#[test]
fn fusion_invariants_on_noisy_walk() {
    let out = generate_trace(&noisy(4)).unwrap();
    let states = fuse(&out.trace, &FusionConfig::default()).unwrap();
    for (s, raw) in states.iter().zip(out.trace.samples()) {
        // linear is computed as accel − gravity; adding back is exact up to one rounding per component.
        let sum = s.gravity + s.linear;
        assert!((sum - raw.accel).norm() <= 4.0 * f64::EPSILON * raw.accel.norm());
        assert_eq!(s.linear, raw.accel - s.gravity);
        let g = s.gravity.norm();
        assert!((g - GRAVITY).abs() <= 0.5, "gravity norm {g}");
    }
}

fn max_yaw_error_after_reliable(cfg: &WalkSimConfig) -> f64 {
    let out = generate_trace(cfg).unwrap();
    let states = fuse(&out.trace, &FusionConfig::default()).unwrap();
    let first_reliable = states.iter().position(|s| s.compass_reliable).expect("compass never reliable");
    let (sd, cd) = cfg.dip_deg.to_radians().sin_cos();
    let field = pedheading::WorldVec::new(0.0, -cfg.field_strength * cd, cfg.field_strength * sd);
    let mut worst: f64 = 0.0;
    for (s, q) in states.iter().zip(&out.true_q).skip(first_reliable) {
        // Forward-model azimuth of the true orientation.
        let to_phone = q.conjugate();
        let g_true = to_phone.rotate_vector(pedheading::WorldVec::new(0.0, 0.0, GRAVITY)).unwrap().into_frame();
        let (a, b) = euler_from_gravity(g_true).unwrap();
        let gamma = yaw_from_magnetics(to_phone.rotate_vector(field).unwrap().into_frame(), a, b).unwrap();
        let err = circular_difference(HeadingAngle::from_radians(s.euler.gamma()), HeadingAngle::from_radians(gamma));
        worst = worst.max(err);
    }
    worst
}

#[test]
fn clean_fusion_tracks_true_yaw() {
    for pose in [PosePreset::Flat, PosePreset::PocketTilt, PosePreset::ShirtVertical] {
        let cfg = WalkSimConfig {
            heading_deg: 250.0,
            heading_schedule: vec![(20.0, 100.0), (40.0, 300.0)],
            pose: pose.quaternion(),
            accel_forward_amp: 0.0,
            accel_lateral_amp: 0.0,
            accel_vertical_amp: 0.0,
            ..Default::default()
        };
        let worst = max_yaw_error_after_reliable(&cfg);
        assert!(worst < 0.5, "{pose:?}: {worst}");
    }
}

#[test]
fn clean_walk_yaw_error_is_bounded_by_reference_contamination() {
    // Gravity references taken mid-stride include lateral acceleration, which
    // tilts the tracked gravity by a fraction of a degree.
    let cfg = WalkSimConfig { heading_deg: 250.0, pose: PosePreset::PocketTilt.quaternion(), ..Default::default() };
    let worst = max_yaw_error_after_reliable(&cfg);
    assert!(worst < 1.0, "{worst}");
}

#[test]
fn disabled_compass_ignores_magnetometer_after_start() {
    let out = generate_trace(&WalkSimConfig { heading_deg: 80.0, duration: 20.0, ..Default::default() }).unwrap();
    let cfg = FusionConfig { yaw_blend: 0.0, ..Default::default() };
    let disturbed = out
        .trace
        .clone()
        .map_samples(|s| {
            if s.t > 0.0 {
                s.mag = PhoneVec::new(s.mag.x + 13.0 * (s.t * 3.0).sin(), s.mag.y - 7.0, s.mag.z);
            }
        })
        .unwrap();
    let a = fuse(&out.trace, &cfg).unwrap();
    let b = fuse(&disturbed, &cfg).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.euler.gamma(), y.euler.gamma());
    }
}

#[test]
fn magnetic_step_breaks_correlation() {
    let cfg = WalkSimConfig {
        heading_deg: 0.0,
        duration: 10.0,
        mag_disturbances: vec![MagDisturbance { t_start: 5.0, t_end: 10.0, offset: PhoneVec::new(40.0, 0.0, 0.0) }],
        ..Default::default()
    };
    let out = generate_trace(&cfg).unwrap();
    let samples = out.trace.samples();
    // Yaw rates over the 1 s window centred on the step.
    let window: Vec<_> = samples.iter().filter(|s| s.t >= 4.5 && s.t < 5.5).collect();
    let mut compass = Vec::new();
    let mut gyro = Vec::new();
    let mut prev: Option<f64> = None;
    let mut unwrapped = 0.0;
    for s in &window {
        let (a, b) = euler_from_gravity(s.accel).unwrap();
        let y = yaw_from_magnetics(s.mag, a, b).unwrap();
        if let Some(p) = prev {
            unwrapped += pedheading::geom::wrap_pi(y - p);
            compass.push(unwrapped * 50.0);
            gyro.push(-s.gyro.z);
            unwrapped = 0.0;
        }
        prev = Some(y);
    }
    let fc = FusionConfig::default();
    assert!(!compass_reliability(&compass, &gyro, &fc).unwrap());

    // Outside the disturbance the compass agrees with truth; inside it does not.
    let yaw_at = |t: f64| {
        let s = samples.iter().find(|s| (s.t - t).abs() < 1e-9).unwrap();
        let (a, b) = euler_from_gravity(s.accel).unwrap();
        HeadingAngle::from_radians(yaw_from_magnetics(s.mag, a, b).unwrap())
    };
    let truth_yaw = |t: f64| HeadingAngle::new(5.0 * (std::f64::consts::PI * 2.0 * t).sin());
    assert!(circular_difference(yaw_at(2.0), truth_yaw(2.0)) < 1e-6);
    assert!(circular_difference(yaw_at(7.0), truth_yaw(7.0)) > 10.0);
}

#[test]
fn mean_accelerometer_norm_is_gravity() {
    let out = generate_trace(&WalkSimConfig { duration: 10.0, ..Default::default() }).unwrap();
    let n = out.trace.len() as f64;
    let mean = out.trace.samples().iter().map(|s| s.accel.norm()).sum::<f64>() / n;
    assert!((mean - GRAVITY).abs() / GRAVITY < 0.01, "{mean}");
}

#[test]
fn vertical_bias_drifts_yaw_without_compass() {
    let pose = PosePreset::PocketTilt.quaternion();
    let cfg = WalkSimConfig {
        duration: 30.0,
        yaw_sway_deg: 0.0,
        accel_forward_amp: 0.0,
        accel_lateral_amp: 0.0,
        accel_vertical_amp: 0.0,
        pose,
        gyro_bias: vertical_gyro_bias(&pose, 1f64.to_radians()).unwrap(),
        ..Default::default()
    };
    let out = generate_trace(&cfg).unwrap();
    let states = fuse(&out.trace, &FusionConfig { reliability_threshold: 1.1, ..Default::default() }).unwrap();
    let drift = circular_difference(
        HeadingAngle::from_radians(states[0].euler.gamma()),
        HeadingAngle::from_radians(states.last().unwrap().euler.gamma()),
    );
    assert!((drift - out.trace.end()).abs() < 0.1, "{drift}");
}

#[test]
fn summary_row_for_table_values() {
    let s = ErrorSummary::from_errors(&[21.0, 21.0, 31.0, 55.0]).unwrap();
    assert_eq!(s.format_row("pants pocket indoor"), "pants pocket indoor & 21 & 31 & 55");
}
