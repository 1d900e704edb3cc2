//! Step skew-product fiber maps built from four north-south circle
//! diffeomorphisms `h_0, h_1, h_2, h_3 = h_2^{-1}`.
//!
//! `h_0` and `h_1` are affine with slope `s` on `[p0 - w, p1 + w]` and fix
//! `p0` resp. `p1`; `h_2` is affine around its attractor `p2`. Each map is
//! closed up across its repeller by two monotone cubic Hermite pieces. Over
//! a linear base of degree `d >= 4` the fiber map at `y` is
//! `h_{floor(d y) mod 4}`, blended linearly into the next digit's map on
//! the last `w` of each digit interval.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use crate::fiber::solve_increasing;
use crate::measure::bin_count;
use crate::solenoid::sample_rng;

const MIN_REPELLER_SLOPE: f64 = 1.2;
const MAX_REPELLER_SLOPE: f64 = 4.0;
/// Smallest derivative tolerated on the spline closure.
const MIN_CLOSURE_SLOPE: f64 = 0.2;
const CHECK_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepIfsParams {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    /// Slope of `h_0`, `h_1`, `h_2` at their attractors, in `(1/2, 1)`.
    pub slope: f64,
    /// Affine margin around `[p0, p1]` and base blending width.
    pub smoothing: f64,
}

impl Default for StepIfsParams {
    fn default() -> Self {
        StepIfsParams {
            p0: 0.40,
            p1: 0.60,
            p2: 0.50,
            q0: 0.05,
            q1: 0.95,
            q2: 0.55,
            slope: 0.8,
            smoothing: 0.01,
        }
    }
}

impl StepIfsParams {
    pub fn validate(&self) -> Result<()> {
        let marked = [self.p0, self.p1, self.p2, self.q0, self.q1, self.q2];
        if marked.iter().any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::Precondition("marked points must lie in [0, 1)".into()));
        }
        for i in 0..6 {
            for j in i + 1..6 {
                if marked[i] == marked[j] {
                    return Err(Error::Precondition(format!(
                        "marked points must be distinct ({} repeated)",
                        marked[i]
                    )));
                }
            }
        }
        let p0 = CirclePoint::new(self.p0);
        if !(p0.ccw_offset(CirclePoint::new(self.p2)) < p0.ccw_offset(CirclePoint::new(self.p1))) {
            return Err(Error::Precondition("need p0 < p2 < p1 in arc order".into()));
        }
        if !(self.slope > 0.5 && self.slope < 1.0) {
            return Err(Error::Precondition(format!("slope {} outside (1/2, 1)", self.slope)));
        }
        if !(self.smoothing >= 0.0 && self.smoothing < 0.1) {
            return Err(Error::Precondition(format!(
                "smoothing width {} outside [0, 0.1)",
                self.smoothing
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Hermite {
    x0: f64,
    x1: f64,
    v0: f64,
    v1: f64,
    m0: f64,
    m1: f64,
}

impl Hermite {
    fn eval(&self, x: f64) -> f64 {
        let h = self.x1 - self.x0;
        let t = (x - self.x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.v0
            + (t3 - 2.0 * t2 + t) * h * self.m0
            + (-2.0 * t3 + 3.0 * t2) * self.v1
            + (t3 - t2) * h * self.m1
    }

    fn deriv(&self, x: f64) -> f64 {
        let h = self.x1 - self.x0;
        let t = (x - self.x0) / h;
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * self.v0 / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.m0
            + (-6.0 * t2 + 6.0 * t) * self.v1 / h
            + (3.0 * t2 - 2.0 * t) * self.m1
    }
}

/// One circle map with a single attractor and a single repeller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NorthSouthSpline {
    /// Affine window `[lo, hi]` in lift coordinates, containing the attractor.
    lo: f64,
    hi: f64,
    attractor: f64,
    slope: f64,
    /// Lifted repeller in `(hi, lo + 1)`.
    repeller: f64,
    left: Hermite,
    right: Hermite,
}

impl NorthSouthSpline {
    fn with_repeller_slope(attractor: f64, repeller: f64, slope: f64, lo: f64, hi: f64, d: f64) -> Self {
        let affine = |x: f64| attractor + slope * (x - attractor);
        let left = Hermite {
            x0: hi,
            x1: repeller,
            v0: affine(hi),
            v1: repeller,
            m0: slope,
            m1: d,
        };
        let right = Hermite {
            x0: repeller,
            x1: lo + 1.0,
            v0: repeller,
            v1: affine(lo) + 1.0,
            m0: d,
            m1: slope,
        };
        NorthSouthSpline {
            lo,
            hi,
            attractor,
            slope,
            repeller,
            left,
            right,
        }
    }

    /// Monotone closure with no fixed points besides the marked pair.
    fn closure_ok(&self) -> bool {
        let check = |h: &Hermite, sign: f64| {
            (1..CHECK_GRID).all(|i| {
                let x = h.x0 + (h.x1 - h.x0) * i as f64 / CHECK_GRID as f64;
                h.deriv(x) >= MIN_CLOSURE_SLOPE && sign * (h.eval(x) - x) > 0.0
            })
        };
        check(&self.left, -1.0) && check(&self.right, 1.0)
    }

    /// Picks the steepest repeller slope in `[1.2, 4]` (by bisection) for
    /// which the closure stays monotone and free of spurious fixed points.
    fn build(attractor: f64, repeller: f64, slope: f64, lo: f64, hi: f64) -> Result<Self> {
        // lift the repeller into the closing arc (hi, lo + 1)
        let repeller = hi + (repeller - hi).rem_euclid(1.0);
        if !(repeller > hi && repeller < lo + 1.0) {
            return Err(Error::Infeasible(format!(
                "repeller {repeller} inside the affine window [{lo}, {hi}]"
            )));
        }
        let feasible = |d: f64| {
            let s = Self::with_repeller_slope(attractor, repeller, slope, lo, hi, d);
            s.closure_ok().then_some(s)
        };
        if let Some(s) = feasible(MAX_REPELLER_SLOPE) {
            return Ok(s);
        }
        let Some(mut best) = feasible(MIN_REPELLER_SLOPE) else {
            return Err(Error::Infeasible(format!(
                "no monotone closure through repeller {repeller} with slope >= {MIN_REPELLER_SLOPE}"
            )));
        };
        let (mut ok, mut bad) = (MIN_REPELLER_SLOPE, MAX_REPELLER_SLOPE);
        for _ in 0..40 {
            let mid = 0.5 * (ok + bad);
            match feasible(mid) {
                Some(s) => {
                    ok = mid;
                    best = s;
                }
                None => bad = mid,
            }
        }
        Ok(best)
    }

    fn reduce(&self, x: f64) -> (f64, f64) {
        let n = (x - self.lo).floor();
        (x - n, n)
    }

    fn lift(&self, x: f64) -> f64 {
        let (t, n) = self.reduce(x);
        let v = if t <= self.hi {
            self.attractor + self.slope * (t - self.attractor)
        } else if t <= self.repeller {
            self.left.eval(t)
        } else {
            self.right.eval(t)
        };
        v + n
    }

    fn deriv(&self, x: f64) -> f64 {
        let (t, _) = self.reduce(x);
        if t <= self.hi {
            self.slope
        } else if t <= self.repeller {
            self.left.deriv(t)
        } else {
            self.right.deriv(t)
        }
    }

    pub(crate) fn repeller_slope(&self) -> f64 {
        self.left.m1
    }

    fn joints(&self) -> [f64; 3] {
        [self.lo, self.hi, self.repeller]
    }
}

/// The four generators and their base-digit selection rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepIfsSpec", into = "StepIfsSpec")]
pub struct StepIfs {
    params: StepIfsParams,
    degree: u32,
    maps: [NorthSouthSpline; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepIfsSpec {
    degree: u32,
    #[serde(flatten)]
    params: StepIfsParams,
}

impl TryFrom<StepIfsSpec> for StepIfs {
    type Error = Error;

    fn try_from(spec: StepIfsSpec) -> Result<Self> {
        StepIfs::build(spec.params, spec.degree)
    }
}

impl From<StepIfs> for StepIfsSpec {
    fn from(s: StepIfs) -> Self {
        StepIfsSpec {
            degree: s.degree,
            params: s.params,
        }
    }
}

impl StepIfs {
    /// Builds `h_0..h_2` for a linear base of degree `degree >= 4`.
    pub fn build(params: StepIfsParams, degree: u32) -> Result<Self> {
        params.validate()?;
        if degree < 4 {
            return Err(Error::Precondition(format!(
                "step skew product needs base degree >= 4, got {degree}"
            )));
        }
        let w = params.smoothing;
        let s = params.slope;
        let p1 = params.p0 + CirclePoint::new(params.p0).ccw_offset(CirclePoint::new(params.p1));
        let (lo, hi) = (params.p0 - w, p1 + w);
        let h0 = NorthSouthSpline::build(params.p0, params.q0, s, lo, hi)?;
        let h1 = NorthSouthSpline::build(p1, params.q1, s, lo, hi)?;
        let p2 = params.p0 + CirclePoint::new(params.p0).ccw_offset(CirclePoint::new(params.p2));
        let half = w.min(0.5 * p2_gap(p2, params.q2));
        let h2 = NorthSouthSpline::build(p2, params.q2, s, p2 - half, p2 + half)?;
        Ok(StepIfs {
            params,
            degree,
            maps: [h0, h1, h2],
        })
    }

    pub fn params(&self) -> &StepIfsParams {
        &self.params
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Repeller multipliers chosen for `h_0, h_1, h_2`.
    pub fn repeller_slopes(&self) -> [f64; 3] {
        [
            self.maps[0].repeller_slope(),
            self.maps[1].repeller_slope(),
            self.maps[2].repeller_slope(),
        ]
    }

    /// Lift of generator `h_k`, `k` in `0..4`.
    pub fn map_lift(&self, k: usize, x: f64) -> f64 {
        match k {
            0..=2 => self.maps[k].lift(x),
            3 => self.h3_lift(x),
            _ => panic!("generator index {k} out of range"),
        }
    }

    pub fn map_deriv(&self, k: usize, x: f64) -> f64 {
        match k {
            0..=2 => self.maps[k].deriv(x),
            3 => 1.0 / self.maps[2].deriv(self.h3_lift(x)),
            _ => panic!("generator index {k} out of range"),
        }
    }

    pub fn apply_map(&self, k: usize, x: CirclePoint) -> CirclePoint {
        CirclePoint::new(self.map_lift(k, x.value()))
    }

    fn h3_lift(&self, x: f64) -> f64 {
        let h2 = &self.maps[2];
        let shift = h2.lift(0.0);
        solve_increasing(|t| h2.lift(t), |t| h2.deriv(t), x, x - shift - 1.0, x - shift + 1.0)
            .expect("h_2 is an increasing degree-one lift")
    }

    /// Digit of the generator active on the base interval containing `y`.
    pub fn digit(&self, y: f64) -> usize {
        let m = (y * self.degree as f64).floor() as u64 % self.degree as u64;
        (m % 4) as usize
    }

    /// `(current digit, next digit, blend weight of next)` at `y`.
    fn blend(&self, y: f64) -> (usize, usize, f64) {
        let d = self.degree as f64;
        let m = (y * d).floor();
        let here = (m as u64 % self.degree as u64 % 4) as usize;
        let w = self.params.smoothing;
        if w <= 0.0 {
            return (here, here, 0.0);
        }
        let boundary = (m + 1.0) / d;
        let gap = boundary - y;
        if gap >= w {
            return (here, here, 0.0);
        }
        let next = ((m as u64 + 1) % self.degree as u64 % 4) as usize;
        (here, next, 1.0 - gap / w)
    }

    pub(crate) fn lift(&self, y: f64, x: f64) -> f64 {
        let (a, b, theta) = self.blend(y);
        if theta == 0.0 || a == b {
            self.map_lift(a, x)
        } else {
            (1.0 - theta) * self.map_lift(a, x) + theta * self.map_lift(b, x)
        }
    }

    pub(crate) fn deriv(&self, y: f64, x: f64) -> f64 {
        let (a, b, theta) = self.blend(y);
        if theta == 0.0 || a == b {
            self.map_deriv(a, x)
        } else {
            (1.0 - theta) * self.map_deriv(a, x) + theta * self.map_deriv(b, x)
        }
    }

    /// Whether `x` lies within `h` of a point where some active generator
    /// switches between its affine and spline pieces.
    pub fn near_joint(&self, y: f64, x: f64, h: f64) -> bool {
        let (a, b, _) = self.blend(y);
        let mut joints: Vec<f64> = Vec::with_capacity(6);
        for k in [a, b] {
            match k {
                0..=2 => joints.extend(self.maps[k].joints()),
                _ => joints.extend(self.maps[2].joints().map(|j| self.maps[2].lift(j))),
            }
        }
        let xp = CirclePoint::new(x);
        joints
            .into_iter()
            .any(|j| crate::circle::circle_dist(xp, CirclePoint::new(j)) <= h)
    }

    /// Orbit of `x = 0` under a random word over `alphabet`, binned at
    /// width `delta`.
    pub fn minimality_test(&self, alphabet: &[usize], word_length: usize, delta: f64, seed: u64) -> Result<MinimalityReport> {
        if word_length < 1000 {
            return Err(Error::Precondition(format!("word length {word_length} < 1000")));
        }
        if alphabet.is_empty() || alphabet.iter().any(|&k| k > 3) {
            return Err(Error::Precondition("alphabet must be a non-empty subset of 0..4".into()));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Precondition(format!("delta {delta} outside (0, 1]")));
        }
        let bins = bin_count(delta);
        let mut histogram = vec![0u64; bins];
        let mut rng = sample_rng(seed, 0);
        let mut x = CirclePoint::ZERO;
        let bin = |x: CirclePoint| ((x.value() * bins as f64) as usize).min(bins - 1);
        histogram[bin(x)] += 1;
        for _ in 0..word_length {
            let k = alphabet[rng.random_range(0..alphabet.len())];
            x = self.apply_map(k, x);
            histogram[bin(x)] += 1;
        }
        let dense = histogram.iter().all(|&c| c > 0);
        Ok(MinimalityReport {
            dense,
            delta,
            word_length,
            histogram,
        })
    }
}

fn p2_gap(p2: f64, q2: f64) -> f64 {
    crate::circle::circle_dist(CirclePoint::new(p2), CirclePoint::new(q2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub dense: bool,
    pub delta: f64,
    pub word_length: usize,
    pub histogram: Vec<u64>,
}
