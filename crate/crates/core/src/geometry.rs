//! Planar positions, bearings and angle normalization.
//!
//! Angles are in degrees with 0 deg along +x and counter-clockwise positive.
//! The same convention is used for antenna orientations, so only relative
//! angles ever reach a radiation pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate about the origin by `deg` degrees counter-clockwise.
    pub fn rotated(&self, deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Self::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }
}

/// Map any finite angle into (-180, 180].
pub fn normalize_deg(angle: f64) -> Result<f64> {
    if !angle.is_finite() {
        return Err(Error::InvalidInput(format!("angle {angle} is not finite")));
    }
    Ok(wrap_deg(angle))
}

pub(crate) fn wrap_deg(angle: f64) -> f64 {
    let r = angle.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

pub fn distance_m(a: Position, b: Position) -> f64 {
    (b.x - a.x).hypot(b.y - a.y)
}

/// World-frame direction from `from` towards `to`.
pub fn bearing_deg(from: Position, to: Position) -> Result<f64> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    normalize_deg(dy.atan2(dx).to_degrees())
}
