//! Walking-heading estimation from phone IMU traces.
//!
//! The pipeline fuses accelerometer, gyroscope and magnetometer readings into
//! a phone orientation ([`fusion`]), smooths the gravity-free acceleration
//! ([`filter`]), rotates it into the world frame and takes the dominant
//! horizontal variance axis over sliding windows ([`heading`]). The axis is
//! disambiguated against the phone azimuth to give the user heading.
//!
//! [`sim`] synthesizes traces with known ground truth and [`eval`] scores
//! estimate streams against it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod eval;
pub mod filter;
pub mod fusion;
pub mod geom;
pub mod heading;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
pub use eval::{azimuth_baseline, score, turn_latency, ErrorSummary, LatencyReport, TurnLatency};
pub use filter::{low_pass, FilterConfig};
pub use fusion::{fuse, FusionConfig, OrientationState};
pub use geom::{
    circular_difference, euler_from_gravity, quaternion_from_euler, rotate_vector, rotation_about_axis,
    yaw_from_magnetics, Axis, EulerAngles, HeadingAngle, PhoneVec, Quaternion, RotationMatrix, Vec3, WorldVec, GRAVITY,
};
pub use heading::{estimate_headings, pca_axis, resolve_ambiguity, HeadingEstimate, WindowConfig};
pub use sim::{generate_trace, PosePreset, SimOutput, WalkSimConfig};
pub use trace::{parse_ground_truth, parse_trace, resample, GroundTruth, ImuSample, ImuTrace};
