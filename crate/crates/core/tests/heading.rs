use nalgebra::{Matrix2, SymmetricEigen};
use pedheading::fusion::{fuse, FusionConfig, OrientationState};
use pedheading::geom::{circular_difference, HeadingAngle, PhoneVec, Quaternion};
use pedheading::heading::{estimate_headings, pca_axis, resolve_ambiguity, transform_to_user_frame, WindowConfig};
use pedheading::sim::{generate_trace, PosePreset, WalkSimConfig};
use pedheading::{Error, FilterConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Axis of the dominant eigenvector of the sample covariance, clockwise from North.
fn eigen_axis(window: &[(f64, f64)]) -> f64 {
    let n = window.len() as f64;
    let mn = window.iter().map(|p| p.0).sum::<f64>() / n;
    let me = window.iter().map(|p| p.1).sum::<f64>() / n;
    let mut c = Matrix2::zeros();
    for &(x, y) in window {
        let d = nalgebra::Vector2::new(x - mn, y - me);
        c += d * d.transpose();
    }
    let eig = SymmetricEigen::new(c / n);
    let i = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(i);
    v[1].atan2(v[0]).to_degrees().rem_euclid(180.0)
}

fn axis_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

fn window_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (8usize..200, any::<u64>(), 0.0f64..180.0, 1.2f64..20.0).prop_map(|(n, seed, axis, ratio)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, c) = axis.to_radians().sin_cos();
        (0..n)
            .map(|_| {
                let u: f64 = rng.sample::<f64, _>(StandardNormal) * ratio;
                let v: f64 = rng.sample(StandardNormal);
                (u * c - v * s, u * s + v * c)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pca_matches_eigendecomposition(w in window_strategy()) {
        let got = pca_axis(&w).unwrap();
        prop_assert!((0.0..180.0).contains(&got.axis_deg));
        prop_assert!(got.anisotropy >= 1.0);
        prop_assert!(axis_gap(got.axis_deg, eigen_axis(&w)).to_radians() < 1e-9);
    }

    #[test]
    fn pca_is_rotation_equivariant(w in window_strategy(), phi in -180.0f64..180.0) {
        let (s, c) = phi.to_radians().sin_cos();
        // Heading rotates clockwise: (n, e) → (n cos φ − e sin φ, n sin φ + e cos φ).
        let rotated: Vec<(f64, f64)> = w.iter().map(|&(n, e)| (n * c - e * s, n * s + e * c)).collect();
        let a = pca_axis(&w).unwrap().axis_deg;
        let b = pca_axis(&rotated).unwrap().axis_deg;
        prop_assert!(axis_gap(b, a + phi).to_radians() < 1e-6);
    }

    #[test]
    fn pca_is_negation_invariant(w in window_strategy()) {
        let neg: Vec<(f64, f64)> = w.iter().map(|&(n, e)| (-n, -e)).collect();
        let a = pca_axis(&w).unwrap().axis_deg;
        let b = pca_axis(&neg).unwrap().axis_deg;
        prop_assert!(axis_gap(a, b).to_radians() < 1e-9);
    }

    #[test]
    fn ambiguity_stays_within_quarter_turn(axis in 0.0f64..180.0, g in 0.0f64..360.0, p in 0.0f64..360.0) {
        let hint = HeadingAngle::new(g);
        let theta = resolve_ambiguity(axis, hint, Some(HeadingAngle::new(p)));
        prop_assert!(circular_difference(theta, hint) <= 90.0);
        prop_assert!(axis_gap(theta.degrees(), axis) < 1e-9);
    }
}

#[test]
fn noisy_line_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (s, c) = 30f64.to_radians().sin_cos();
    let w: Vec<(f64, f64)> = (0..150)
        .map(|i| {
            let k = (i as f64 * 0.37).sin();
            let nn: f64 = rng.sample(StandardNormal);
            let ne: f64 = rng.sample(StandardNormal);
            (k * c + 0.05 * nn, k * s + 0.05 * ne)
        })
        .collect();
    assert!(axis_gap(pca_axis(&w).unwrap().axis_deg, 30.0) < 2.0);
    assert!(matches!(pca_axis(&w[..7]), Err(Error::InsufficientData(_))));
}

#[test]
fn transform_keeps_horizontal_vectors_horizontal() {
    let q = pedheading::quaternion_from_euler(&pedheading::EulerAngles::from_degrees(0.0, 0.0, 90.0)).conjugate();
    let w = transform_to_user_frame(PhoneVec::new(0.0, 1.0, 0.0), &q).unwrap();
    assert!(w.up().abs() < 1e-12);
    assert!((w.east() - 1.0).abs() < 1e-12);
}

fn states_for(cfg: &WalkSimConfig) -> (Vec<OrientationState>, pedheading::SimOutput) {
    let out = generate_trace(cfg).unwrap();
    let states = fuse(&out.trace, &FusionConfig::default()).unwrap();
    (states, out)
}

fn yawed_flat(offset_deg: f64) -> Quaternion {
    pedheading::quaternion_from_euler(&pedheading::EulerAngles::from_degrees(0.0, 0.0, offset_deg)).conjugate()
}

#[test]
fn clean_walk_flat_phone() {
    let (states, _) = states_for(&WalkSimConfig { heading_deg: 45.0, ..Default::default() });
    let est = estimate_headings(&states, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    assert_eq!(est.len(), 115);
    for e in &est {
        assert!(circular_difference(e.theta_u, HeadingAngle::new(45.0)) < 0.5, "{e:?}");
        assert!(e.confidence > 0.9);
        assert!(circular_difference(e.theta_u, e.gamma_hint) <= 90.0);
        assert!(axis_gap(e.theta_u.degrees(), e.axis_deg) < 1e-9);
    }
}

#[test]
fn clean_walk_sideways_phone() {
    // 85° rather than 90°: at exactly 90° the azimuth is equidistant from both
    // axis directions.
    let (states, _) = states_for(&WalkSimConfig { heading_deg: 45.0, pose: yawed_flat(85.0), ..Default::default() });
    let est = estimate_headings(&states, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    for e in &est {
        assert!(circular_difference(e.theta_u, HeadingAngle::new(45.0)) < 2.0, "{e:?}");
        assert!(circular_difference(e.gamma_hint, HeadingAngle::new(130.0)) < 2.0, "{e:?}");
    }
}

#[test]
fn standing_still_has_no_confidence() {
    let cfg = WalkSimConfig {
        accel_forward_amp: 0.0,
        accel_lateral_amp: 0.0,
        accel_vertical_amp: 0.0,
        yaw_sway_deg: 0.0,
        duration: 20.0,
        ..Default::default()
    };
    let (states, _) = states_for(&cfg);
    let est = estimate_headings(&states, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    assert!(!est.is_empty());
    assert!(est.iter().all(|e| e.confidence == 0.0));
}

#[test]
fn scaling_linear_acceleration_keeps_heading() {
    let (states, _) = states_for(&WalkSimConfig {
        heading_deg: 200.0,
        pose: PosePreset::PocketTilt.quaternion(),
        ..Default::default()
    });
    let scaled: Vec<OrientationState> =
        states.iter().map(|s| OrientationState { linear: s.linear * 3.5, ..*s }).collect();
    let a = estimate_headings(&states, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    let b = estimate_headings(&scaled, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(axis_gap(x.axis_deg, y.axis_deg) < 1e-9);
        assert!(circular_difference(x.theta_u, y.theta_u) < 1e-9);
    }
}

#[test]
fn estimation_is_deterministic() {
    let cfg = WalkSimConfig {
        heading_deg: 300.0,
        noise_accel_sigma: 0.5,
        noise_gyro_sigma: 0.02,
        noise_mag_sigma: 2.0,
        seed: 3,
        ..Default::default()
    };
    let (s1, _) = states_for(&cfg);
    let (s2, _) = states_for(&cfg);
    let a = estimate_headings(&s1, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    let b = estimate_headings(&s2, &FilterConfig::default(), &WindowConfig::default()).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.theta_u.degrees().to_bits(), y.theta_u.degrees().to_bits());
        assert_eq!(x.confidence.to_bits(), y.confidence.to_bits());
    }
}

#[test]
fn short_trace_is_rejected() {
    let (states, _) = states_for(&WalkSimConfig { duration: 10.0, ..Default::default() });
    let long = WindowConfig { omega: 12.0, hop: 1.0, ..Default::default() };
    assert!(matches!(estimate_headings(&states, &FilterConfig::default(), &long), Err(Error::InsufficientData(_))));
}
