//! Points, distances and arcs on the circle `T = R/Z`.
//!
//! Every coordinate in the crate, base or fiber, is a [`CirclePoint`] held
//! in its `[0, 1)` representative. Arcs are closed and oriented
//! counter-clockwise (increasing lift) from `start`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::EmpiricalCircleMeasure;

/// A point of `R/Z`, stored as its representative in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub const ZERO: CirclePoint = CirclePoint(0.0);

    pub fn new(x: f64) -> Self {
        CirclePoint(normalize(x))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Rotation by `t`.
    pub fn shift(self, t: f64) -> Self {
        CirclePoint::new(self.0 + t)
    }

    /// Signed lift difference `other - self` reduced to `[0, 1)`: the
    /// counter-clockwise travel from `self` to `other`.
    pub fn ccw_offset(self, other: CirclePoint) -> f64 {
        normalize(other.0 - self.0)
    }
}

impl From<f64> for CirclePoint {
    fn from(x: f64) -> Self {
        CirclePoint::new(x)
    }
}

impl From<CirclePoint> for f64 {
    fn from(p: CirclePoint) -> f64 {
        p.0
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Fractional part in `[0, 1)`; `1.0` produced by rounding is folded to `0.0`.
#[inline]
pub fn normalize(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Geodesic distance on the circle, in `[0, 1/2]`.
#[inline]
pub fn circle_dist(a: CirclePoint, b: CirclePoint) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(1.0 - d)
}

/// Distance from a real number to the nearest integer.
#[inline]
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// A closed arc `[start, start + length]` traversed counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleArc {
    start: CirclePoint,
    length: f64,
}

impl CircleArc {
    /// Arcs of zero length are not constructible here; covering-arc searches
    /// may still report a degenerate arc for a one-point cloud.
    pub fn new(start: CirclePoint, length: f64) -> Result<Self> {
        if !(length > 0.0 && length <= 1.0) {
            return Err(Error::Precondition(format!(
                "arc length {length} outside (0, 1]"
            )));
        }
        Ok(CircleArc { start, length })
    }

    pub(crate) fn degenerate_or(start: CirclePoint, length: f64) -> Self {
        CircleArc {
            start,
            length: length.clamp(0.0, 1.0),
        }
    }

    pub fn full() -> Self {
        CircleArc {
            start: CirclePoint::ZERO,
            length: 1.0,
        }
    }

    pub fn start(&self) -> CirclePoint {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> CirclePoint {
        self.start.shift(self.length)
    }

    pub fn midpoint(&self) -> CirclePoint {
        self.start.shift(0.5 * self.length)
    }

    pub fn contains(&self, p: CirclePoint) -> bool {
        self.length >= 1.0 || self.start.ccw_offset(p) <= self.length
    }
}

/// Shortest closed arc holding at least `ceil(mass * n)` of the `n` points.
///
/// The left endpoint of an optimal arc can always be moved onto a sample
/// point, so only the `n` anchored candidates are examined after sorting.
pub fn minimal_covering_arc(points: &[CirclePoint], mass: f64) -> Result<CircleArc> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(Error::Precondition(format!("mass {mass} outside (0, 1]")));
    }
    let n = points.len();
    let needed = required_count(mass, n);
    let mut sorted: Vec<f64> = points.iter().map(|p| p.value()).collect();
    sorted.sort_by(f64::total_cmp);

    // Wrapped spans use ccw_offset so the arc contains its own far endpoint.
    let span = |i: usize, j: usize| {
        if j < n {
            sorted[j] - sorted[i]
        } else if sorted[j - n] < sorted[i] {
            CirclePoint::new(sorted[i]).ccw_offset(CirclePoint::new(sorted[j - n]))
        } else {
            1.0
        }
    };
    let mut best = (0usize, f64::INFINITY);
    for i in 0..n {
        let len = span(i, i + needed - 1);
        if len < best.1 {
            best = (i, len);
        }
    }
    Ok(CircleArc::degenerate_or(
        CirclePoint::new(sorted[best.0]),
        best.1,
    ))
}

/// `ceil(mass * n)` with a guard against `0.9 * 1000 = 900.0000000000001`.
pub(crate) fn required_count(mass: f64, n: usize) -> usize {
    let raw = mass * n as f64;
    let rounded = raw.round();
    let c = if (raw - rounded).abs() < 1e-9 * n.max(1) as f64 {
        rounded
    } else {
        raw.ceil()
    };
    (c as usize).clamp(1, n)
}

/// First Wasserstein distance between two equal-count, equal-weight
/// empirical measures, with the geodesic ground metric.
///
/// An optimal matching between sorted samples on the circle is a cyclic
/// shift of the sorted order, so the `n` shifts are scanned.
pub fn wasserstein_circle(a: &EmpiricalCircleMeasure, b: &EmpiricalCircleMeasure) -> Result<f64> {
    let n = a.len();
    if n != b.len() || !a.has_uniform_weights() || !b.has_uniform_weights() {
        return Err(Error::ResampleRequired(n, b.len()));
    }
    let mut xs: Vec<f64> = a.points().iter().map(|p| p.value()).collect();
    let mut ys: Vec<f64> = b.points().iter().map(|p| p.value()).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);

    let mut best = f64::INFINITY;
    for shift in 0..n {
        let cost: f64 = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let y = ys[(i + shift) % n];
                let d = (x - y).abs();
                d.min(1.0 - d)
            })
            .sum();
        best = best.min(cost);
    }
    Ok(best / n as f64)
}
