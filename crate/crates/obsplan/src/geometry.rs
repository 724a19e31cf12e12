//! Planar primitives and the observation-quality model.
//!
//! An [`Object`] sits at a position with a facing direction; an observer at
//! point `p` observes it only from inside the *effective region*: the annulus
//! `d_min <= |op| <= d_max` intersected with the sector of half-angle `theta`
//! around the facing ray. Inside the region the observation quality is
//!
//! ```text
//! q(o, p) = w * a / (|op| + b)^2 * cos(deviation)
//! ```
//!
//! and exactly `0.0` outside. All boundaries are closed; comparisons carry a
//! small absolute tolerance so that points constructed on a boundary by
//! rotation/translation still count as inside.

use crate::error::{Error, Result};

/// Absolute slack for closed-boundary comparisons (meters / radians).
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl std::ops::Sub for Point2 {
    type Output = Vec2;

    fn sub(self, rhs: Point2) -> Vec2 {
        Vec2 { x: self.x - rhs.x, y: self.y - rhs.y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Unsigned angle between two non-zero vectors, in `[0, pi]`.
pub fn angle_between(u: Vec2, v: Vec2) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::domain("angle_between: zero-length vector"));
    }
    Ok((u.dot(v) / (nu * nv)).clamp(-1.0, 1.0).acos())
}

/// A directed object to observe. `facing` is radians in `[0, 2*pi)`;
/// `weight` scales the quality this object contributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Object {
    pub position: Point2,
    pub facing: f64,
    pub weight: f64,
}

impl Object {
    pub fn new(position: Point2, facing: f64, weight: f64) -> Result<Self> {
        if !position.x.is_finite() || !position.y.is_finite() || !facing.is_finite() {
            return Err(Error::domain("object position/facing must be finite"));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::domain(format!("object weight must be >= 0, got {weight}")));
        }
        Ok(Object { position, facing: facing.rem_euclid(std::f64::consts::TAU), weight })
    }

    /// Unit vector of the facing direction.
    pub fn facing_vector(&self) -> Vec2 {
        Vec2::new(self.facing.cos(), self.facing.sin())
    }
}

/// Sensor model: admissible distance band, half-angle of the admissible
/// sector, and the quality constants `a` (scale) and `b` (offset).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
}

impl SensingSpec {
    /// Spec with default quality constants `a = 1`, `b = 0`.
    pub fn new(d_min: f64, d_max: f64, theta: f64) -> Result<Self> {
        Self::with_constants(d_min, d_max, theta, 1.0, 0.0)
    }

    pub fn with_constants(d_min: f64, d_max: f64, theta: f64, a: f64, b: f64) -> Result<Self> {
        if !(d_min.is_finite() && d_min > 0.0) {
            return Err(Error::domain(format!("d_min must be > 0, got {d_min}")));
        }
        if !(d_max.is_finite() && d_max > d_min) {
            return Err(Error::domain(format!("d_max must be > d_min, got {d_max}")));
        }
        if !(theta.is_finite() && theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::domain(format!("theta must be in (0, pi/2], got {theta}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("quality constant a must be > 0, got {a}")));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::domain(format!("quality constant b must be >= 0, got {b}")));
        }
        Ok(SensingSpec { d_min, d_max, theta, a, b })
    }
}

/// Single-object quality extremes for a unit-weight object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityBounds {
    /// Best case: distance `d_min`, zero deviation.
    pub q_max_single: f64,
    /// Worst admissible case: distance `d_max`, deviation `theta`.
    pub q_min_single: f64,
}

/// Best and worst quality a unit-weight object can yield from inside its
/// effective region.
pub fn quality_bounds(s: &SensingSpec) -> QualityBounds {
    QualityBounds {
        q_max_single: s.a / (s.d_min + s.b).powi(2),
        q_min_single: s.a / (s.d_max + s.b).powi(2) * s.theta.cos(),
    }
}

/// Whether `p` lies inside the closed effective region of `o`.
pub fn can_observe(o: &Object, p: Point2, s: &SensingSpec) -> bool {
    let d = o.position.distance(p);
    if d == 0.0 || d < s.d_min - BOUNDARY_TOL || d > s.d_max + BOUNDARY_TOL {
        return false;
    }
    // d > 0 here, so the direction vector is non-zero.
    let dev = angle_between(o.facing_vector(), p - o.position).expect("non-zero direction");
    dev <= s.theta + BOUNDARY_TOL
}

/// Observation quality of `o` seen from `p`; `0.0` whenever `p` is outside
/// the effective region. Distance and deviation are clamped onto the closed
/// region so boundary points attain the exact boundary quality.
pub fn quality(o: &Object, p: Point2, s: &SensingSpec) -> f64 {
    let d = o.position.distance(p);
    if d == 0.0 || d < s.d_min - BOUNDARY_TOL || d > s.d_max + BOUNDARY_TOL {
        return 0.0;
    }
    let dev = angle_between(o.facing_vector(), p - o.position).expect("non-zero direction");
    if dev > s.theta + BOUNDARY_TOL {
        return 0.0;
    }
    let d = d.clamp(s.d_min, s.d_max);
    let dev = dev.min(s.theta);
    o.weight * s.a / (d + s.b).powi(2) * dev.cos()
}
