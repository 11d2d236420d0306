//! Group law, homogeneous norm and metric, dilations and rotations of the
//! first Heisenberg group, modelled on R³ with coordinates (x, y, t).

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of H. `(x, y)` is the horizontal part, `t` the vertical one.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        HPoint { x, y, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    pub fn horizontal(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn inv(&self) -> HPoint {
        inv(*self)
    }

    pub fn norm(&self) -> f64 {
        norm(*self)
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.t.abs())
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.t)
    }
}

impl Mul for HPoint {
    type Output = HPoint;

    fn mul(self, rhs: HPoint) -> HPoint {
        mul(self, rhs)
    }
}

impl From<[f64; 3]> for HPoint {
    fn from(c: [f64; 3]) -> Self {
        HPoint::new(c[0], c[1], c[2])
    }
}

pub fn mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint { x: p.x + q.x, y: p.y + q.y, t: p.t + q.t + 0.5 * (p.x * q.y - p.y * q.x) }
}

pub fn inv(p: HPoint) -> HPoint {
    HPoint { x: -p.x, y: -p.y, t: -p.t }
}

pub fn norm(p: HPoint) -> f64 {
    p.x.hypot(p.y).max(p.t.abs().sqrt())
}

/// `‖q⁻¹·p‖`, expanded so no intermediate point is built.
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dt = p.t - q.t + 0.5 * (q.y * p.x - q.x * p.y);
    dx.hypot(dy).max(dt.abs().sqrt())
}

pub fn dilate(r: f64, p: HPoint) -> Result<HPoint> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveScale(r));
    }
    Ok(HPoint { x: r * p.x, y: r * p.y, t: r * r * p.t })
}

/// Rotation of the horizontal part by `theta` radians.
pub fn rotate(theta: f64, p: HPoint) -> HPoint {
    let (s, c) = theta.sin_cos();
    HPoint { x: c * p.x - s * p.y, y: s * p.x + c * p.y, t: p.t }
}

/// Direction angle of a horizontal line, kept in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        Angle(normalize_angle(theta))
    }

    pub fn radians(&self) -> f64 {
        self.0
    }

    /// `(cos θ, sin θ)`, exact on the coordinate axes.
    pub fn direction(&self) -> (f64, f64) {
        if self.0 == 0.0 {
            (1.0, 0.0)
        } else if self.0 == std::f64::consts::FRAC_PI_2 {
            (0.0, 1.0)
        } else {
            (self.0.cos(), self.0.sin())
        }
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}
