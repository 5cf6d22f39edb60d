//! Frame conventions, vectors, Euler angles, rotation matrices and quaternions.
//!
//! Phone frame: X toward the right edge of the phone, Y toward its head, Z out
//! of the screen. World frame: East, North, Up, stored in that component order
//! (use [`Vec3::north`], [`Vec3::east`], [`Vec3::up`] rather than raw fields).
//!
//! Euler angles are pitch `alpha` (about phone X), roll `beta` (about phone Y)
//! and yaw `gamma`, the azimuth of the phone measured clockwise from North.
//! The world→phone rotation is
//!
//! ```text
//! C(α, β, γ) = R_X(α) · R_Y(β) · R_Z(γ)ᵀ
//! ```
//!
//! with `R_A(b)` the elementary matrices of [`rotation_about_axis`]. Gravity
//! reaction in the phone frame is `C · [0, 0, g]`, and a magnetometer reading is
//! `C · [0, −E cos ψ, E sin ψ]` for field strength `E` and dip `ψ`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.80665;

/// Marker for the coordinate frame a [`Vec3`] is expressed in.
pub trait Frame: Copy + Clone + fmt::Debug + PartialEq + Default + Send + Sync + 'static {
    const TAG: FrameTag;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameTag {
    Phone,
    World,
}

/// Phone body frame (X, Y, Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Phone;

/// Earth frame (East, North, Up).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct World;

impl Frame for Phone {
    const TAG: FrameTag = FrameTag::Phone;
}

impl Frame for World {
    const TAG: FrameTag = FrameTag::World;
}

/// A 3-vector tagged with its frame. Arithmetic between frames does not compile.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Vec3<F: Frame> {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    frame: PhantomData<F>,
}

pub type PhoneVec = Vec3<Phone>;
pub type WorldVec = Vec3<World>;

impl<F: Frame> fmt::Debug for Vec3<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[{}, {}, {}]", F::TAG, self.x, self.y, self.z)
    }
}

impl<F: Frame> Vec3<F> {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z, frame: PhantomData }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn frame(&self) -> FrameTag {
        F::TAG
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(self / n)
    }

    /// Reinterprets the components in another frame. Only meaningful right
    /// after a rotation that actually maps between the two frames.
    pub fn into_frame<G: Frame>(self) -> Vec3<G> {
        Vec3::new(self.x, self.y, self.z)
    }
}

impl Vec3<World> {
    pub fn from_neu(north: f64, east: f64, up: f64) -> Self {
        Self::new(east, north, up)
    }

    pub fn east(&self) -> f64 {
        self.x
    }

    pub fn north(&self) -> f64 {
        self.y
    }

    pub fn up(&self) -> f64 {
        self.z
    }
}

impl<F: Frame> Add for Vec3<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<F: Frame> Sub for Vec3<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<F: Frame> AddAssign for Vec3<F> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<F: Frame> SubAssign for Vec3<F> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<F: Frame> Neg for Vec3<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<F: Frame> Mul<f64> for Vec3<F> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl<F: Frame> Div<f64> for Vec3<F> {
    type Output = Self;
    fn div(self, k: f64) -> Self {
        Self::new(self.x / k, self.y / k, self.z / k)
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_pi(angle: f64) -> f64 {
    let r = (angle + PI).rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        -PI
    } else {
        r - PI
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps degrees into `[0, 360)`.
pub fn wrap_360(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wraps degrees into `[-180, 180)`.
pub fn wrap_180(deg: f64) -> f64 {
    wrap_360(deg + 180.0) - 180.0
}

/// Pitch, roll and yaw in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl EulerAngles {
    /// Normalizes `alpha` and `beta` into `[-π, π)` and `gamma` into `[0, 2π)`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha: wrap_pi(alpha), beta: wrap_pi(beta), gamma: wrap_two_pi(gamma) }
    }

    pub fn from_degrees(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self::new(alpha.to_radians(), beta.to_radians(), gamma.to_radians())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(alpha, beta, gamma)` in degrees.
    pub fn to_degrees(&self) -> (f64, f64, f64) {
        (self.alpha.to_degrees(), self.beta.to_degrees(), self.gamma.to_degrees())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Row-major 3×3 rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix {
    pub m: [[f64; 3]; 3],
}

impl RotationMatrix {
    pub const fn identity() -> Self {
        Self { m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Elementary matrix `R_A(b)`:
    ///
    /// ```text
    /// R_X(b) = [1 0 0; 0 cos b sin b; 0 −sin b cos b]
    /// R_Y(b) = [cos b 0 −sin b; 0 1 0; sin b 0 cos b]
    /// R_Z(b) = [cos b sin b 0; −sin b cos b 0; 0 0 1]
    /// ```
    pub fn about_axis(axis: Axis, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let m = match axis {
            Axis::X => [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]],
            Axis::Y => [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]],
            Axis::Z => [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]],
        };
        Self { m }
    }

    /// World→phone rotation `R_X(α)·R_Y(β)·R_Z(γ)ᵀ`.
    pub fn world_to_phone(angles: &EulerAngles) -> Self {
        Self::about_axis(Axis::X, angles.alpha)
            * Self::about_axis(Axis::Y, angles.beta)
            * Self::about_axis(Axis::Z, angles.gamma).transpose()
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self { m: [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]] }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// True when `RᵀR = I` and `det R = 1`, each within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let p = self.transpose() * *self;
        for (i, row) in p.m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (v - want).abs() > tol {
                    return false;
                }
            }
        }
        (self.determinant() - 1.0).abs() <= tol
    }

    pub fn apply<F: Frame>(&self, v: Vec3<F>) -> Vec3<F> {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

impl Mul for RotationMatrix {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Self { m }
    }
}

/// `R_A(b)` as printed in the elementary-rotation table.
pub fn rotation_about_axis(axis: Axis, angle: f64) -> RotationMatrix {
    RotationMatrix::about_axis(axis, angle)
}

/// Hamilton quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    /// Rotation by `angle` about `axis` (normalized here).
    pub fn from_axis_angle<F: Frame>(axis: Vec3<F>, angle: f64) -> Result<Self> {
        let r = axis.normalize()?;
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Self::new(c, s * r.x, s * r.y, s * r.z))
    }

    /// World→phone quaternion for `angles`: `rotate_vector(q, v)` equals
    /// `RotationMatrix::world_to_phone(angles).apply(v)`.
    pub fn from_euler(angles: &EulerAngles) -> Self {
        let (sa, ca) = (0.5 * angles.alpha).sin_cos();
        let (sb, cb) = (0.5 * angles.beta).sin_cos();
        let (sg, cg) = (0.5 * angles.gamma).sin_cos();
        Self::new(
            ca * cb * cg - sa * sb * sg,
            -sa * cb * cg - ca * sb * sg,
            sa * cb * sg - ca * sb * cg,
            ca * cb * sg + sa * sb * cg,
        )
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite quaternion"));
        }
        Ok(Self::new(self.w / n, self.x / n, self.y / n, self.z / n))
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Vector part of `q · (0, v) · q*`. Requires a unit quaternion (within 1e-6).
    pub fn rotate_vector<F: Frame>(&self, v: Vec3<F>) -> Result<Vec3<F>> {
        if (self.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("rotation requires a unit quaternion, norm is {}", self.norm())));
        }
        Ok(self.rotate_unchecked(v))
    }

    pub(crate) fn rotate_unchecked<F: Frame>(&self, v: Vec3<F>) -> Vec3<F> {
        // v' = v + 2w(u × v) + 2u × (u × v)
        let u = Vec3::<F>::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    pub fn to_rotation_matrix(&self) -> RotationMatrix {
        let Self { w, x, y, z } = *self;
        RotationMatrix {
            m: [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ],
        }
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

pub fn quaternion_from_euler(angles: &EulerAngles) -> Quaternion {
    Quaternion::from_euler(angles)
}

pub fn quat_multiply(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

pub fn quat_conjugate(q: Quaternion) -> Quaternion {
    q.conjugate()
}

pub fn quat_normalize(q: Quaternion) -> Result<Quaternion> {
    q.normalize()
}

pub fn rotate_vector<F: Frame>(q: &Quaternion, v: Vec3<F>) -> Result<Vec3<F>> {
    q.rotate_vector(v)
}

/// Pitch and roll from the phone-frame gravity reaction `G_m`.
///
/// `tan α = g_y / g_z`, `tan β = −g_x / (g_y sin α + g_z cos α)`, both solved
/// with `atan2` on the printed numerator/denominator. When `g_y` and `g_z` are
/// both below 1e-9 (gravity along phone X) pitch is undefined and reported as 0.
pub fn euler_from_gravity(gravity: PhoneVec) -> Result<(f64, f64)> {
    if !gravity.is_finite() || !(gravity.norm() > 1e-12) {
        return Err(Error::invalid("gravity vector must be finite and non-zero"));
    }
    let (gx, gy, gz) = (gravity.x, gravity.y, gravity.z);
    let alpha = if gy.abs() < 1e-9 && gz.abs() < 1e-9 { 0.0 } else { gy.atan2(gz) };
    let (sa, ca) = alpha.sin_cos();
    let beta = (-gx).atan2(gy * sa + gz * ca);
    Ok((wrap_pi(alpha), wrap_pi(beta)))
}

/// Tilt-compensated azimuth in `[0, 2π)` from a phone-frame magnetometer reading.
///
/// The field strength and dip cancel in the ratio, so any positive scaling of
/// `mag` gives the same yaw.
pub fn yaw_from_magnetics(mag: PhoneVec, alpha: f64, beta: f64) -> Result<f64> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let num = mag.x * cb + mag.y * sb * sa + mag.z * sb * ca;
    let den = mag.z * sa - mag.y * ca;
    if !(num.is_finite() && den.is_finite()) {
        return Err(Error::invalid("magnetometer reading must be finite"));
    }
    if num.abs() < 1e-12 && den.abs() < 1e-12 {
        return Err(Error::DegenerateField);
    }
    Ok(wrap_two_pi(num.atan2(den)))
}

/// Heading in degrees, clockwise from North, normalized to `[0, 360)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct HeadingAngle(f64);

impl HeadingAngle {
    pub fn new(degrees: f64) -> Self {
        Self(wrap_360(degrees))
    }

    pub fn from_radians(rad: f64) -> Self {
        Self::new(rad.to_degrees())
    }

    pub fn degrees(&self) -> f64 {
        self.0
    }

    pub fn radians(&self) -> f64 {
        self.0.to_radians()
    }
}

impl fmt::Display for HeadingAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Smallest absolute angle between two headings, in `[0, 180]` degrees.
pub fn circular_difference(a: HeadingAngle, b: HeadingAngle) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(360.0 - d)
}

/// Circular mean of headings; `None` for an empty input or a resultant of zero length.
pub fn circular_mean(angles: impl IntoIterator<Item = HeadingAngle>) -> Option<HeadingAngle> {
    let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
    for a in angles {
        let (sa, ca) = a.radians().sin_cos();
        s += sa;
        c += ca;
        n += 1;
    }
    if n == 0 || (s.abs() < 1e-12 && c.abs() < 1e-12) {
        return None;
    }
    Some(HeadingAngle::from_radians(s.atan2(c)))
}
