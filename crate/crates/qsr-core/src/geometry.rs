//! Metric foundation: points, eo-points, angle arithmetic and similarity transforms.
//!
//! Everything downstream (sector classification, distance classes, qualitative
//! triangle enumeration) is built on the primitives in this module. All values
//! are immutable; all functions are pure.

use std::f64::consts::{PI, TAU};

use crate::error::{QsrError, Result};

/// A point in the plane. Coordinates are finite reals in abstract length units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Point> {
        if !x.is_finite() || !y.is_finite() {
            return Err(QsrError::invalid(format!(
                "point coordinates must be finite, got ({x}, {y})"
            )));
        }
        Ok(Point { x, y })
    }
}

/// An elevated oriented point: a planar position, a heading in `[0, 2π)` and a
/// strictly positive internal reference distance (the elevation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EOPoint {
    pub position: Point,
    pub heading: f64,
    pub elevation: f64,
}

impl EOPoint {
    /// Builds an eo-point, normalizing the heading. Elevation must be finite
    /// and strictly positive; the distance-class boundaries degenerate at zero.
    pub fn new(position: Point, heading: f64, elevation: f64) -> Result<EOPoint> {
        let heading = normalize_angle(heading)?;
        if !elevation.is_finite() || elevation <= 0.0 {
            return Err(QsrError::invalid(format!(
                "elevation must be finite and strictly positive, got {elevation}"
            )));
        }
        Ok(EOPoint {
            position,
            heading,
            elevation,
        })
    }

    pub fn from_coords(x: f64, y: f64, heading: f64, elevation: f64) -> Result<EOPoint> {
        EOPoint::new(Point::new(x, y)?, heading, elevation)
    }
}

/// How boundary membership is decided under floating point: angles within
/// `angle_eps` of a ray count as on the ray, lengths within `length_eps_rel`
/// (relative) of a boundary circle count as on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TolerancePolicy {
    pub angle_eps: f64,
    pub length_eps_rel: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            angle_eps: 1e-9,
            length_eps_rel: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(angle_eps: f64, length_eps_rel: f64) -> Result<TolerancePolicy> {
        if !angle_eps.is_finite() || angle_eps < 0.0 {
            return Err(QsrError::invalid(format!(
                "angle_eps must be finite and non-negative, got {angle_eps}"
            )));
        }
        if !length_eps_rel.is_finite() || length_eps_rel < 0.0 {
            return Err(QsrError::invalid(format!(
                "length_eps_rel must be finite and non-negative, got {length_eps_rel}"
            )));
        }
        Ok(TolerancePolicy {
            angle_eps,
            length_eps_rel,
        })
    }
}

/// Reduces an angle to `[0, 2π)`. Counterclockwise positive, 0 = +x axis.
pub fn normalize_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(QsrError::invalid(format!("angle must be finite, got {a}")));
    }
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    Ok(if r >= TAU { 0.0 } else { r })
}

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Direction of the ray from `a` to `b`, in `[0, 2π)`. Undefined (returns 0)
/// for coincident points; callers handle coincidence before asking.
pub fn bearing(a: Point, b: Point) -> f64 {
    let raw = (b.y - a.y).atan2(b.x - a.x);
    normalize_angle(raw).expect("atan2 of finite coordinates is finite")
}

/// Rotates, uniformly scales and translates an eo-point. The heading rotates
/// with the frame and the elevation scales with lengths, so relations of all
/// calculi in this crate are preserved under a shared transform.
pub fn apply_similarity(
    p: &EOPoint,
    rotation: f64,
    translation: Point,
    scale: f64,
) -> Result<EOPoint> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(QsrError::invalid(format!(
            "similarity scale must be finite and strictly positive, got {scale}"
        )));
    }
    if !rotation.is_finite() {
        return Err(QsrError::invalid(format!(
            "rotation must be finite, got {rotation}"
        )));
    }
    let (s, c) = rotation.sin_cos();
    let x = p.position.x * c - p.position.y * s;
    let y = p.position.x * s + p.position.y * c;
    EOPoint::new(
        Point::new(x * scale + translation.x, y * scale + translation.y)?,
        p.heading + rotation,
        p.elevation * scale,
    )
}

/// Smallest absolute angular difference between two angles, in `[0, π]`.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}
