use rand::Rng;
use serde::Serialize;

use super::par_indexed;
use crate::base::ExpandingBase;
use crate::circle::{dist_to_integer, CirclePoint};
use crate::error::{ensure, Result};
use crate::fiber::FiberFamily;
use crate::skew::SkewSystem;
use crate::solenoid::sample_rng;

/// Grid box `(iy, ix)` of a `k x k` partition of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridBox {
    pub iy: usize,
    pub ix: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixingWitness {
    pub source: GridBox,
    pub target: GridBox,
}

/// First-hit data of a box-to-box mixing test.
///
/// `verdict == false` is a refutation at resolution `k`: some target box
/// was never reached from some source box within `n_max` steps. A true
/// verdict is evidence only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport {
    pub k: usize,
    pub particles_per_box: usize,
    pub n_max: usize,
    /// `first_hit[u][v]`: first step `n >= 1` at which a particle started in
    /// box `u` lies in box `v`. Boxes are numbered `iy * k + ix`.
    #[serde(skip)]
    pub first_hit: Vec<Vec<Option<u32>>>,
    pub verdict: bool,
    pub missing_pairs: usize,
    pub latest_first_hit: Option<u32>,
    pub witness: Option<MixingWitness>,
}

impl MixingReport {
    pub fn grid_box(&self, index: usize) -> GridBox {
        GridBox {
            iy: index / self.k,
            ix: index % self.k,
        }
    }
}

fn box_index(k: usize, y: CirclePoint, x: CirclePoint) -> usize {
    let iy = ((y.value() * k as f64) as usize).min(k - 1);
    let ix = ((x.value() * k as f64) as usize).min(k - 1);
    iy * k + ix
}

/// Iterates a uniform particle cloud from each box of a `k x k` grid and
/// records when every other box is first hit. Base orbits are refreshed
/// with random low digits so power-of-two degrees do not collapse to 0.
pub fn mixing_check(
    f: &SkewSystem,
    k: usize,
    particles_per_box: usize,
    n_max: usize,
    seed: u64,
    threads: usize,
) -> Result<MixingReport> {
    ensure(k >= 4, || format!("resolution k = {k} < 4"))?;
    ensure(particles_per_box >= 25, || format!("particles_per_box = {particles_per_box} < 25"))?;
    let boxes = k * k;
    let first_hit = par_indexed(boxes, threads, |src| {
        let mut rng = sample_rng(seed, src);
        let (iy, ix) = (src as usize / k, src as usize % k);
        let mut cloud: Vec<(CirclePoint, CirclePoint)> = (0..particles_per_box)
            .map(|_| {
                let y = (iy as f64 + rng.random::<f64>()) / k as f64;
                let x = (ix as f64 + rng.random::<f64>()) / k as f64;
                (CirclePoint::new(y), CirclePoint::new(x))
            })
            .collect();
        let mut hits = vec![None; boxes];
        let mut remaining = boxes;
        for n in 1..=n_max as u32 {
            for p in cloud.iter_mut() {
                let x = f.fiber().eval(p.0, p.1);
                let y = f.base().apply_with_fresh_digits(p.0, &mut rng);
                *p = (y, x);
                let slot = &mut hits[box_index(k, y, x)];
                if slot.is_none() {
                    *slot = Some(n);
                    remaining -= 1;
                }
            }
            if remaining == 0 {
                break;
            }
        }
        hits
    })?;
    let mut missing_pairs = 0;
    let mut witness = None;
    let mut latest = None;
    for (u, row) in first_hit.iter().enumerate() {
        for (v, hit) in row.iter().enumerate() {
            match hit {
                Some(n) => latest = latest.max(Some(*n)),
                None => {
                    missing_pairs += 1;
                    witness.get_or_insert(MixingWitness {
                        source: GridBox { iy: u / k, ix: u % k },
                        target: GridBox { iy: v / k, ix: v % k },
                    });
                }
            }
        }
    }
    Ok(MixingReport {
        k,
        particles_per_box,
        n_max,
        first_hit,
        verdict: missing_pairs == 0,
        missing_pairs,
        latest_first_hit: latest,
        witness,
    })
}

/// Largest one-step change of `c = j x - (i - 1) y (mod 1)` under the shear
/// map `(i y, x + j y)`, over `samples` random points.
pub fn invariant_circle_check(i: u32, j: i64, samples: usize, seed: u64) -> Result<f64> {
    ensure(i > 1, || format!("i = {i} must exceed 1"))?;
    let f = SkewSystem::new(ExpandingBase::linear(i)?, FiberFamily::LinearShear { j })?;
    let c = |y: CirclePoint, x: CirclePoint| j as f64 * x.value() - (i - 1) as f64 * y.value();
    let mut rng = sample_rng(seed, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let y = CirclePoint::new(rng.random::<f64>());
        let x = CirclePoint::new(rng.random::<f64>());
        let (y1, x1) = f.step(y, x);
        worst = worst.max(dist_to_integer(c(y1, x1) - c(y, x)));
    }
    Ok(worst)
}
