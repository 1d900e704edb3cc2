//! Weighted point clouds on the circle.
//!
//! Lebesgue measure, pulled-back fiber measures and delta measures are all
//! represented by the same [`EmpiricalCircleMeasure`]; transport moves the
//! particles and never touches the weights.

use std::f64::consts::TAU;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::circle::{CircleArc, CirclePoint};
use crate::error::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;
const MIN_RESULTANT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCircleMeasure {
    points: Vec<CirclePoint>,
    weights: Vec<f64>,
}

/// Location and spread of a concentrated cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomEstimate {
    pub location: CirclePoint,
    /// `1 - |resultant|`, zero iff all mass sits at one point.
    pub dispersion: f64,
}

impl EmpiricalCircleMeasure {
    /// Weights are rescaled to sum to one; they must be positive and finite.
    pub fn new(points: Vec<CirclePoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if points.len() != weights.len() {
            return Err(Error::Precondition(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Precondition("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(EmpiricalCircleMeasure { points, weights })
    }

    pub fn from_points(points: Vec<CirclePoint>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    pub fn singleton(p: CirclePoint) -> Self {
        EmpiricalCircleMeasure {
            points: vec![p],
            weights: vec![1.0],
        }
    }

    /// The grid `k / n` with equal weights: the discretized Lebesgue measure.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("uniform grid needs n >= 1".into()));
        }
        let points = (0..n).map(|k| CirclePoint::new(k as f64 / n as f64)).collect();
        Ok(EmpiricalCircleMeasure {
            points,
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CirclePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_uniform_weights(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| (x - w).abs() <= WEIGHT_TOL)
    }

    /// Moves every particle through `f`, keeping weights.
    pub fn pushforward(&self, mut f: impl FnMut(CirclePoint) -> CirclePoint) -> Self {
        EmpiricalCircleMeasure {
            points: self.points.iter().map(|&p| f(p)).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn try_pushforward(
        &self,
        mut f: impl FnMut(CirclePoint) -> Result<CirclePoint>,
    ) -> Result<Self> {
        let points = self.points.iter().map(|&p| f(p)).collect::<Result<_>>()?;
        Ok(EmpiricalCircleMeasure {
            points,
            weights: self.weights.clone(),
        })
    }

    pub fn rotate(&self, t: f64) -> Self {
        self.pushforward(|p| p.shift(t))
    }

    /// Shortest closed arc carrying mass at least `1 - eps`.
    pub fn concentration(&self, eps: f64) -> Result<CircleArc> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::Precondition(format!("eps {eps} outside [0, 1)")));
        }
        let target = 1.0 - eps - WEIGHT_TOL;
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.points[i].value().total_cmp(&self.points[j].value()));
        let pos = |k: usize| {
            let p = self.points[order[k % n]].value();
            if k < n {
                p
            } else {
                p + 1.0
            }
        };
        let weight = |k: usize| self.weights[order[k % n]];

        // two pointers over the doubled sorted sequence
        let mut best = (0usize, f64::INFINITY);
        let mut end = 0usize;
        let mut mass = 0.0;
        for start in 0..n {
            if end < start {
                end = start;
                mass = 0.0;
            }
            while mass < target && end < start + n {
                mass += weight(end);
                end += 1;
            }
            if mass >= target {
                let len = pos(end - 1) - pos(start);
                if len < best.1 {
                    best = (start, len);
                }
            }
            mass -= weight(start);
        }
        Ok(CircleArc::degenerate_or(
            CirclePoint::new(pos(best.0)),
            best.1,
        ))
    }

    /// Circular weighted mean and `1 - |resultant|`.
    pub fn atom_estimate(&self) -> Result<AtomEstimate> {
        let (mut re, mut im) = (0.0, 0.0);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let (s, c) = (TAU * p.value()).sin_cos();
            re += w * c;
            im += w * s;
        }
        let r = re.hypot(im);
        if r < MIN_RESULTANT {
            return Err(Error::NoConcentration(r));
        }
        Ok(AtomEstimate {
            location: CirclePoint::new(im.atan2(re) / TAU),
            dispersion: (1.0 - r).clamp(0.0, 1.0),
        })
    }

    fn bin_masses(&self, delta: f64) -> Result<Vec<f64>> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Precondition(format!("bin width {delta} outside (0, 1]")));
        }
        let bins = bin_count(delta);
        let mut mass = vec![0.0; bins];
        for (p, w) in self.points.iter().zip(&self.weights) {
            let b = ((p.value() * bins as f64) as usize).min(bins - 1);
            mass[b] += w;
        }
        Ok(mass)
    }

    /// Fraction of the `ceil(1/delta)` equal bins that carry mass.
    pub fn support_coverage(&self, delta: f64) -> Result<f64> {
        let mass = self.bin_masses(delta)?;
        let hit = mass.iter().filter(|&&m| m > 0.0).count();
        Ok(hit as f64 / mass.len() as f64)
    }

    /// Largest single-bin mass at bin width `delta`.
    pub fn max_atom_mass(&self, delta: f64) -> Result<f64> {
        let mass = self.bin_masses(delta)?;
        Ok(mass.into_iter().fold(0.0, f64::max))
    }

    /// One `point,weight` row per particle, with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "point,weight")?;
        for (p, w) in self.points.iter().zip(&self.weights) {
            writeln!(out, "{},{}", p.value(), w)?;
        }
        Ok(())
    }
}

pub(crate) fn bin_count(delta: f64) -> usize {
    let raw = 1.0 / delta;
    let r = raw.round();
    if (raw - r).abs() < 1e-9 {
        r as usize
    } else {
        raw.ceil() as usize
    }
}
