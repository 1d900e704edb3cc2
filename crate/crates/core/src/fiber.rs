//! Parametric families `y -> f_y` of orientation-preserving circle
//! diffeomorphisms.
//!
//! Each family is evaluated through a lift `L_y : R -> R` with
//! `L_y(x + 1) = L_y(x) + 1`; `eval` reduces the lift mod 1, `invert`
//! bisects on it.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circle::{circle_dist, CirclePoint};
use crate::error::{Error, Result};
use crate::stepifs::StepIfs;

const BISECTION_STEPS: usize = 60;
const NEWTON_STEPS: usize = 5;

/// Fiber map families. JSON form: `{"variant": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "variant",
    content = "params",
    rename_all = "snake_case",
    try_from = "RawFiber"
)]
pub enum FiberFamily {
    /// `x + a sin(2 pi x) + y`
    SineCoupled { amplitude: f64 },
    /// `x + y`
    RigidRotation,
    /// `x + j y`
    LinearShear { j: i64 },
    /// `x + a sin(2 pi x)`, independent of the base point.
    NorthSouth { amplitude: f64 },
    /// Digit-indexed maps `h_0..h_3` over a linear base.
    StepIfs(StepIfs),
}

#[derive(Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
enum RawFiber {
    SineCoupled { amplitude: f64 },
    RigidRotation,
    LinearShear { j: i64 },
    NorthSouth { amplitude: f64 },
    StepIfs(StepIfs),
}

impl TryFrom<RawFiber> for FiberFamily {
    type Error = Error;

    fn try_from(raw: RawFiber) -> Result<Self> {
        match raw {
            RawFiber::SineCoupled { amplitude } => FiberFamily::sine_coupled(amplitude),
            RawFiber::RigidRotation => Ok(FiberFamily::RigidRotation),
            RawFiber::LinearShear { j } => Ok(FiberFamily::LinearShear { j }),
            RawFiber::NorthSouth { amplitude } => FiberFamily::north_south(amplitude),
            RawFiber::StepIfs(s) => Ok(FiberFamily::StepIfs(s)),
        }
    }
}

/// Grid extrema of `f_y'(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivBounds {
    pub m_min: f64,
    pub m_max: f64,
    /// `max(m_max, 1 / m_min)`
    pub m: f64,
    /// Always true: the values come from a finite grid, not a certified bound.
    pub grid_approximation: bool,
}

fn check_amplitude(a: f64) -> Result<()> {
    if a.is_finite() && TAU * a.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::NotDiffeomorphism(format!(
            "amplitude {a} violates 2*pi*|a| < 1"
        )))
    }
}

impl FiberFamily {
    pub fn sine_coupled(amplitude: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        Ok(FiberFamily::SineCoupled { amplitude })
    }

    pub fn north_south(amplitude: f64) -> Result<Self> {
        check_amplitude(amplitude)?;
        Ok(FiberFamily::NorthSouth { amplitude })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FiberFamily::SineCoupled { .. } => "sine_coupled",
            FiberFamily::RigidRotation => "rigid_rotation",
            FiberFamily::LinearShear { .. } => "linear_shear",
            FiberFamily::NorthSouth { .. } => "north_south",
            FiberFamily::StepIfs(_) => "step_ifs",
        }
    }

    /// Lift of `f_y` evaluated at any real `x`.
    pub fn lift(&self, y: CirclePoint, x: f64) -> f64 {
        let y = y.value();
        match self {
            FiberFamily::SineCoupled { amplitude } => x + amplitude * (TAU * x).sin() + y,
            FiberFamily::RigidRotation => x + y,
            FiberFamily::LinearShear { j } => x + *j as f64 * y,
            FiberFamily::NorthSouth { amplitude } => x + amplitude * (TAU * x).sin(),
            FiberFamily::StepIfs(s) => s.lift(y, x),
        }
    }

    pub fn eval(&self, y: CirclePoint, x: CirclePoint) -> CirclePoint {
        CirclePoint::new(self.lift(y, x.value()))
    }

    /// `f_y'(x)`, in closed form for every variant.
    pub fn deriv(&self, y: CirclePoint, x: CirclePoint) -> f64 {
        self.deriv_lift(y, x.value())
    }

    pub(crate) fn deriv_lift(&self, y: CirclePoint, x: f64) -> f64 {
        match self {
            FiberFamily::SineCoupled { amplitude } | FiberFamily::NorthSouth { amplitude } => {
                1.0 + TAU * amplitude * (TAU * x).cos()
            }
            FiberFamily::RigidRotation | FiberFamily::LinearShear { .. } => 1.0,
            FiberFamily::StepIfs(s) => s.deriv(y.value(), x),
        }
    }

    /// The preimage `f_y^{-1}(target)`: bisection on the lift over one
    /// fundamental domain, then Newton polishing.
    pub fn invert(&self, y: CirclePoint, target: CirclePoint) -> Result<CirclePoint> {
        if let FiberFamily::RigidRotation = self {
            return Ok(CirclePoint::new(target.value() - y.value()));
        }
        if let FiberFamily::LinearShear { j } = self {
            return Ok(CirclePoint::new(target.value() - *j as f64 * y.value()));
        }
        let x = invert_lift(|x| self.lift(y, x), |x| self.deriv_lift(y, x), target.value())?;
        let out = CirclePoint::new(x);
        let residual = circle_dist(self.eval(y, out), target);
        if residual > 1e-12 {
            return Err(Error::NotDiffeomorphism(format!(
                "inverse residual {residual:.3e} at y = {y}"
            )));
        }
        Ok(out)
    }

    /// Extrema of `f_y'` over a `grid_n x grid_n` grid in `(y, x)`.
    pub fn deriv_bounds(&self, grid_n: usize) -> Result<DerivBounds> {
        if grid_n < 64 {
            return Err(Error::Precondition(format!("grid_n {grid_n} < 64")));
        }
        let step = 1.0 / grid_n as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for iy in 0..grid_n {
            let y = CirclePoint::new(iy as f64 * step);
            for ix in 0..grid_n {
                let d = self.deriv_lift(y, ix as f64 * step);
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        Ok(DerivBounds {
            m_min: lo,
            m_max: hi,
            m: hi.max(1.0 / lo),
            grid_approximation: true,
        })
    }
}

/// Solves `lift(x) = target (mod 1)` for `x` in `[0, 1)` given an
/// increasing degree-one lift.
pub(crate) fn invert_lift(
    lift: impl Fn(f64) -> f64,
    deriv: impl Fn(f64) -> f64,
    target: f64,
) -> Result<f64> {
    let base = lift(0.0);
    let top = lift(1.0);
    if !((top - base) - 1.0).abs().lt(&1e-9) {
        return Err(Error::NotDiffeomorphism(format!(
            "lift is not degree one: L(1) - L(0) = {}",
            top - base
        )));
    }
    let goal = base + (target - base).rem_euclid(1.0);
    solve_increasing(&lift, &deriv, goal, 0.0, 1.0)
}

/// Root of `lift(x) = goal` on a bracket where `lift` is increasing.
pub(crate) fn solve_increasing(
    lift: impl Fn(f64) -> f64,
    deriv: impl Fn(f64) -> f64,
    goal: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let (flo, fhi) = (lift(lo) - goal, lift(hi) - goal);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::NotDiffeomorphism(format!(
            "failed to bracket {goal} in [{lo}, {hi}]"
        )));
    }
    let (mut flo, mut fhi) = (flo, fhi);
    let slack = 1e-12 * (1.0 + goal.abs());
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let fm = lift(mid) - goal;
        if fm < flo - slack || fm > fhi + slack {
            return Err(Error::NotDiffeomorphism(format!(
                "lift is not monotone near {mid}"
            )));
        }
        if fm < 0.0 {
            flo = fm;
            lo = mid;
        } else {
            fhi = fm;
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    if !(deriv(x) > 0.0) {
        return Err(Error::NotDiffeomorphism(format!(
            "non-positive derivative {} at {x}",
            deriv(x)
        )));
    }
    let mut err = (lift(x) - goal).abs();
    for _ in 0..NEWTON_STEPS {
        let d = deriv(x);
        if !(d > 0.0) {
            break;
        }
        let cand = x - (lift(x) - goal) / d;
        let cerr = (lift(cand) - goal).abs();
        if cerr < err {
            x = cand;
            err = cerr;
        } else {
            break;
        }
    }
    Ok(x)
}
