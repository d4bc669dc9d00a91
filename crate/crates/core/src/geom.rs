//! Planar geometry primitives and intersection-based event localization.
//!
//! Angles are kept in radians, wrapped to `(-π, π]`. A *bearing* is a global
//! direction, i.e. sensor orientation plus the locally measured DoA. DoA axes
//! are treated as full lines, so a bearing and its opposite describe the same
//! axis.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default `|sin Δ|` below which two DoA axes are considered parallel.
pub const DEFAULT_PARALLEL_THRESHOLD: f64 = 1e-6;

/// A point (or displacement) in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position2D {
    pub x: f64,
    pub y: f64,
}

impl Position2D {
    pub const ORIGIN: Position2D = Position2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Direction of this vector as a wrapped angle.
    pub fn arg(self) -> Angle {
        Angle::from_radians(self.y.atan2(self.x))
    }

    /// Rotates counter-clockwise by `angle`.
    pub fn rotated(self, angle: Angle) -> Self {
        let (s, c) = angle.radians().sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn mean(points: &[Position2D]) -> Option<Position2D> {
        if points.is_empty() {
            return None;
        }
        let sum = points.iter().fold(Position2D::ORIGIN, |acc, &p| acc + p);
        Some(sum * (1.0 / points.len() as f64))
    }
}

impl Add for Position2D {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Position2D {
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Position2D {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Position2D {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Position2D {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Position2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.x, self.y)
    }
}

/// An angle in radians, always wrapped to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps a finite raw value. Non-finite input is passed through unchanged;
    /// use [`wrap_angle`] where the input is untrusted.
    pub fn from_radians(raw: f64) -> Self {
        Angle(wrap_radians(raw))
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// The opposite direction (same DoA axis).
    pub fn flipped(self) -> Self {
        Self::from_radians(self.0 + PI)
    }

    pub fn unit_vector(self) -> UnitVec2 {
        doa_unit_vector(self)
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::from_radians(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::from_radians(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::from_radians(-self.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}°", self.degrees())
    }
}

fn wrap_radians(raw: f64) -> f64 {
    let r = raw.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else if r == 0.0 && raw.is_sign_negative() {
        0.0
    } else {
        r
    }
}

/// Wraps a raw radian value into `(-π, π]`.
pub fn wrap_angle(raw: f64) -> Result<Angle> {
    if !raw.is_finite() {
        return Err(Error::InvalidAngle(raw));
    }
    Ok(Angle::from_radians(raw))
}

/// A vector of unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec2 {
    pub x: f64,
    pub y: f64,
}

impl UnitVec2 {
    pub fn dot(self, other: UnitVec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn as_position(self) -> Position2D {
        Position2D::new(self.x, self.y)
    }
}

/// `(cos a, sin a)`.
pub fn doa_unit_vector(a: Angle) -> UnitVec2 {
    let (s, c) = a.radians().sin_cos();
    UnitVec2 { x: c, y: s }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Acoustic,
    Visual,
}

/// Position and orientation of one sensor node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorPose {
    pub position: Position2D,
    pub orientation: Angle,
    pub modality: Modality,
}

impl SensorPose {
    pub fn new(position: Position2D, orientation: Angle, modality: Modality) -> Self {
        Self {
            position,
            orientation,
            modality,
        }
    }

    pub fn acoustic(position: Position2D, orientation: Angle) -> Self {
        Self::new(position, orientation, Modality::Acoustic)
    }

    pub fn visual(position: Position2D, orientation: Angle) -> Self {
        Self::new(position, orientation, Modality::Visual)
    }

    /// Global bearing of a locally measured DoA.
    pub fn bearing(&self, local_doa: Angle) -> Angle {
        self.orientation + local_doa
    }

    /// Local DoA under which this sensor sees `target`.
    pub fn local_doa_to(&self, target: Position2D) -> Angle {
        (target - self.position).arg() - self.orientation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionStatus {
    Detection,
    MissedDetection,
    FalseDetection,
    NoDetection,
}

impl DetectionStatus {
    pub fn has_angle(self) -> bool {
        matches!(self, DetectionStatus::Detection | DetectionStatus::FalseDetection)
    }
}

/// The content of one observation cell. An angle is carried exactly when the
/// status is a (true or false) detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reading {
    Detection(Angle),
    FalseDetection(Angle),
    MissedDetection,
    NoDetection,
}

impl Reading {
    pub fn angle(&self) -> Option<Angle> {
        match *self {
            Reading::Detection(a) | Reading::FalseDetection(a) => Some(a),
            Reading::MissedDetection | Reading::NoDetection => None,
        }
    }

    pub fn status(&self) -> DetectionStatus {
        match self {
            Reading::Detection(_) => DetectionStatus::Detection,
            Reading::FalseDetection(_) => DetectionStatus::FalseDetection,
            Reading::MissedDetection => DetectionStatus::MissedDetection,
            Reading::NoDetection => DetectionStatus::NoDetection,
        }
    }

    /// Builds a reading, enforcing that an angle accompanies detections only.
    pub fn from_parts(status: DetectionStatus, angle: Option<Angle>) -> Option<Reading> {
        match (status, angle) {
            (DetectionStatus::Detection, Some(a)) => Some(Reading::Detection(a)),
            (DetectionStatus::FalseDetection, Some(a)) => Some(Reading::FalseDetection(a)),
            (DetectionStatus::MissedDetection, None) => Some(Reading::MissedDetection),
            (DetectionStatus::NoDetection, None) => Some(Reading::NoDetection),
            _ => None,
        }
    }

    pub fn with_angle(&self, angle: Angle) -> Reading {
        match self {
            Reading::FalseDetection(_) => Reading::FalseDetection(angle),
            _ => Reading::Detection(angle),
        }
    }
}

/// One azimuth measurement of the speaker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaObservation {
    pub sensor_index: usize,
    pub time_index: usize,
    pub modality: Modality,
    pub reading: Reading,
}

/// Intersection of the two DoA axes, using the default parallel threshold.
pub fn ray_intersection(
    pose_a: &SensorPose,
    bearing_a: Angle,
    pose_b: &SensorPose,
    bearing_b: Angle,
) -> Result<Position2D> {
    line_intersection(
        pose_a.position,
        bearing_a,
        pose_b.position,
        bearing_b,
        DEFAULT_PARALLEL_THRESHOLD,
    )
}

/// Intersection of the lines through `a` along `bearing_a` and through `b`
/// along `bearing_b`.
pub fn line_intersection(
    a: Position2D,
    bearing_a: Angle,
    b: Position2D,
    bearing_b: Angle,
    parallel_threshold: f64,
) -> Result<Position2D> {
    let ua = bearing_a.unit_vector().as_position();
    let ub = bearing_b.unit_vector().as_position();
    let denom = ua.cross(ub);
    if denom.abs() < parallel_threshold {
        return Err(Error::NearParallel(denom.abs()));
    }
    let t = (b - a).cross(ub) / denom;
    Ok(a + ua * t)
}

/// All pairwise intersections of a ray bundle: `(i, j, point)` with `i < j`.
/// Near-parallel pairs are skipped.
pub fn pairwise_intersections(
    origins: &[Position2D],
    bearings: &[Angle],
    parallel_threshold: f64,
) -> Vec<(usize, usize, Position2D)> {
    let n = origins.len().min(bearings.len());
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if let Ok(p) = line_intersection(
                origins[i],
                bearings[i],
                origins[j],
                bearings[j],
                parallel_threshold,
            ) {
                out.push((i, j, p));
            }
        }
    }
    out
}

fn check_lengths(poses: &[SensorPose], bearings: &[Angle]) -> Result<()> {
    if poses.len() != bearings.len() {
        return Err(Error::LengthMismatch {
            expected: poses.len(),
            actual: bearings.len(),
        });
    }
    if poses.len() < 2 {
        return Err(Error::Underdetermined(format!(
            "{} bearing(s), need at least 2",
            poses.len()
        )));
    }
    Ok(())
}

/// Mean of all pairwise DoA-axis intersections, and the mean distance of the
/// intersections from that mean.
pub fn localize_event(poses: &[SensorPose], bearings: &[Angle]) -> Result<(Position2D, f64)> {
    localize_event_with(poses, bearings, DEFAULT_PARALLEL_THRESHOLD)
}

pub fn localize_event_with(
    poses: &[SensorPose],
    bearings: &[Angle],
    parallel_threshold: f64,
) -> Result<(Position2D, f64)> {
    check_lengths(poses, bearings)?;
    let origins: Vec<Position2D> = poses.iter().map(|p| p.position).collect();
    let points: Vec<Position2D> = pairwise_intersections(&origins, bearings, parallel_threshold)
        .into_iter()
        .map(|(_, _, p)| p)
        .collect();
    let mean = Position2D::mean(&points)
        .ok_or_else(|| Error::Underdetermined("all DoA axis pairs are parallel".into()))?;
    let spread = points.iter().map(|p| p.distance(mean)).sum::<f64>() / points.len() as f64;
    Ok((mean, spread))
}

/// For each sensor, the mean distance between `event_hypothesis` and the
/// intersections its axis forms with the other axes. Sensors without any
/// non-parallel partner get `f64::INFINITY`.
pub fn per_sensor_consistency(
    poses: &[SensorPose],
    bearings: &[Angle],
    event_hypothesis: Position2D,
) -> Result<Vec<f64>> {
    per_sensor_consistency_with(poses, bearings, event_hypothesis, DEFAULT_PARALLEL_THRESHOLD)
}

pub fn per_sensor_consistency_with(
    poses: &[SensorPose],
    bearings: &[Angle],
    event_hypothesis: Position2D,
    parallel_threshold: f64,
) -> Result<Vec<f64>> {
    check_lengths(poses, bearings)?;
    let origins: Vec<Position2D> = poses.iter().map(|p| p.position).collect();
    let pairs = pairwise_intersections(&origins, bearings, parallel_threshold);
    if pairs.is_empty() {
        return Err(Error::Underdetermined("all DoA axis pairs are parallel".into()));
    }
    let mut sums = vec![0.0; poses.len()];
    let mut counts = vec![0usize; poses.len()];
    for (i, j, p) in pairs {
        let d = p.distance(event_hypothesis);
        sums[i] += d;
        sums[j] += d;
        counts[i] += 1;
        counts[j] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| if c == 0 { f64::INFINITY } else { s / c as f64 })
        .collect())
}
