//! Expanding circle endomorphisms `g`.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{normalize, CirclePoint};
use crate::error::{Error, Result};
use crate::fiber::solve_increasing;

/// JSON form: `{"variant": "linear", "d": 3}` or
/// `{"variant": "perturbed", "d": 3, "b": 0.01}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", try_from = "RawBase")]
pub enum ExpandingBase {
    /// `d y mod 1`
    Linear { d: u32 },
    /// `d y + b sin(2 pi y) mod 1`
    Perturbed { d: u32, b: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum RawBase {
    Linear { d: u32 },
    Perturbed { d: u32, b: f64 },
}

impl TryFrom<RawBase> for ExpandingBase {
    type Error = Error;

    fn try_from(raw: RawBase) -> Result<Self> {
        match raw {
            RawBase::Linear { d } => ExpandingBase::linear(d),
            RawBase::Perturbed { d, b } => ExpandingBase::perturbed(d, b),
        }
    }
}

impl ExpandingBase {
    pub fn linear(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::Precondition(format!("degree {d} < 2")));
        }
        Ok(ExpandingBase::Linear { d })
    }

    /// Requires `d - 2 pi |b| > 1` so that `min g' > 1`.
    pub fn perturbed(d: u32, b: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Precondition(format!("degree {d} < 2")));
        }
        if !(b.is_finite() && d as f64 - TAU * b.abs() > 1.0) {
            return Err(Error::Precondition(format!(
                "perturbation {b} destroys expansion for degree {d}"
            )));
        }
        Ok(ExpandingBase::Perturbed { d, b })
    }

    pub fn degree(&self) -> u32 {
        match *self {
            ExpandingBase::Linear { d } | ExpandingBase::Perturbed { d, .. } => d,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ExpandingBase::Linear { .. })
    }

    /// Lift `G : R -> R` with `G(y + 1) = G(y) + d` and `G(0) = 0`.
    pub fn lift(&self, y: f64) -> f64 {
        match *self {
            ExpandingBase::Linear { d } => d as f64 * y,
            ExpandingBase::Perturbed { d, b } => d as f64 * y + b * (TAU * y).sin(),
        }
    }

    pub fn deriv(&self, y: f64) -> f64 {
        match *self {
            ExpandingBase::Linear { d } => d as f64,
            ExpandingBase::Perturbed { d, b } => d as f64 + TAU * b * (TAU * y).cos(),
        }
    }

    pub fn apply(&self, y: CirclePoint) -> CirclePoint {
        CirclePoint::new(self.lift(y.value()))
    }

    /// `g(y)` for a Lebesgue-typical point known only to double precision.
    ///
    /// Multiplying by `d` shifts `log2 d` unknown low-order digits into the
    /// representable range; for power-of-two degrees plain `apply` fills
    /// them with zeros and every orbit reaches 0 within ~53 / log2 d steps.
    /// Here the vacated digits are drawn uniformly instead, which is the
    /// conditional law of the true orbit given the stored digits.
    pub fn apply_with_fresh_digits<R: Rng + ?Sized>(&self, y: CirclePoint, rng: &mut R) -> CirclePoint {
        let fresh = rng.random::<f64>() * self.degree() as f64 * f64::EPSILON;
        CirclePoint::new(normalize(self.lift(y.value())) + fresh)
    }

    /// Branch index `k` such that `y` is the `k`-th preimage of `g(y)`.
    pub fn branch_of(&self, y: CirclePoint) -> u32 {
        let k = self.lift(y.value()).floor();
        (k.max(0.0) as u32).min(self.degree() - 1)
    }

    /// The `d` preimages of `y`, ascending; entry `k` lies on branch `k`.
    pub fn preimages(&self, y: CirclePoint) -> Vec<CirclePoint> {
        (0..self.degree())
            .map(|k| self.preimage(y, k).expect("expanding lift brackets every branch"))
            .collect()
    }

    pub fn preimage(&self, y: CirclePoint, branch: u32) -> Result<CirclePoint> {
        let d = self.degree();
        if branch >= d {
            return Err(Error::InvalidBranch { digit: branch, degree: d });
        }
        let goal = y.value() + branch as f64;
        match *self {
            ExpandingBase::Linear { d } => Ok(CirclePoint::new(goal / d as f64)),
            ExpandingBase::Perturbed { .. } => {
                let x = solve_increasing(|t| self.lift(t), |t| self.deriv(t), goal, 0.0, 1.0)?;
                Ok(CirclePoint::new(x))
            }
        }
    }

    /// Minimum of `g'` over the grid `j / grid_n`.
    pub fn min_expansion(&self, grid_n: usize) -> Result<f64> {
        if grid_n < 256 {
            return Err(Error::Precondition(format!("grid_n {grid_n} < 256")));
        }
        Ok((0..grid_n)
            .map(|j| self.deriv(j as f64 / grid_n as f64))
            .fold(f64::INFINITY, f64::min))
    }

    /// All fixed points of `g^k`, ascending.
    pub fn periodic_points(&self, k: u32) -> Result<Vec<CirclePoint>> {
        if k == 0 {
            return Err(Error::Precondition("period k must be >= 1".into()));
        }
        let count = (self.degree() as u64)
            .checked_pow(k)
            .filter(|&n| n <= 1 << 22)
            .ok_or_else(|| Error::Precondition(format!("d^k too large for k = {k}")))?
            - 1;
        match *self {
            ExpandingBase::Linear { .. } => Ok((0..count)
                .map(|j| CirclePoint::new(j as f64 / count as f64))
                .collect()),
            ExpandingBase::Perturbed { .. } => {
                // H(y) = G^k(y) - y increases from 0 to d^k - 1 on [0, 1]
                let h = |y: f64| (0..k).fold(y, |acc, _| self.lift(acc)) - y;
                let dh = |y: f64| {
                    let mut acc = y;
                    let mut prod = 1.0;
                    for _ in 0..k {
                        prod *= self.deriv(acc);
                        acc = self.lift(acc);
                    }
                    prod - 1.0
                };
                (0..count)
                    .map(|m| solve_increasing(h, dh, m as f64, 0.0, 1.0).map(CirclePoint::new))
                    .collect()
            }
        }
    }
}
