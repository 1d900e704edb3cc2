use rand::Rng;
use serde::Serialize;

use super::{median, par_indexed};
use crate::circle::{circle_dist, CirclePoint};
use crate::error::{ensure, Result};
use crate::skew::SkewSystem;
use crate::solenoid::sample_rng;

/// Fiber trajectories of several initial conditions sharing one base orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncRun {
    /// `xs[t][i]`: position of initial condition `i` at time `t`.
    pub xs: Vec<Vec<CirclePoint>>,
    /// Largest pairwise circle distance at each time.
    pub spread: Vec<f64>,
}

fn max_pairwise(xs: &[CirclePoint]) -> f64 {
    let mut m: f64 = 0.0;
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            m = m.max(circle_dist(a, b));
        }
    }
    m
}

pub fn sync_run(f: &SkewSystem, y0: CirclePoint, xs: &[CirclePoint], n: usize) -> Result<SyncRun> {
    ensure(xs.len() >= 2, || format!("need at least two initial conditions, got {}", xs.len()))?;
    let mut traces = Vec::with_capacity(n + 1);
    let mut spread = Vec::with_capacity(n + 1);
    let mut cur = xs.to_vec();
    let mut y = y0;
    for t in 0..=n {
        spread.push(max_pairwise(&cur));
        traces.push(cur.clone());
        if t < n {
            for x in cur.iter_mut() {
                *x = f.fiber().eval(y, *x);
            }
            y = f.base().apply(y);
        }
    }
    Ok(SyncRun { xs: traces, spread })
}

/// `series[t]`: largest pairwise fiber distance after `t` steps.
pub fn sync_experiment(f: &SkewSystem, y0: CirclePoint, xs: &[CirclePoint], n: usize) -> Result<Vec<f64>> {
    Ok(sync_run(f, y0, xs, n)?.spread)
}

/// Fraction of steps that increase the series, counted up to the first time
/// it drops below `threshold` (the whole series if it never does).
pub fn uptick_fraction(series: &[f64], threshold: f64) -> f64 {
    let end = series
        .iter()
        .position(|&s| s < threshold)
        .unwrap_or(series.len().saturating_sub(1));
    if end == 0 {
        return 0.0;
    }
    let ups = series[..=end].windows(2).filter(|w| w[1] > w[0]).count();
    ups as f64 / end as f64
}

/// `(1/n) sum log f_{y_t}'(x_t)` along the orbit of `(y0, x0)`.
pub fn fiber_lyapunov(f: &SkewSystem, y0: CirclePoint, x0: CirclePoint, n: usize) -> Result<f64> {
    ensure(n >= 1, || "lyapunov orbit length must be >= 1".into())?;
    let (mut y, mut x) = (y0, x0);
    let mut sum = 0.0;
    for _ in 0..n {
        sum += f.fiber().deriv(y, x).ln();
        (y, x) = f.step(y, x);
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncStatistics {
    pub pairs: usize,
    pub n_max: usize,
    pub threshold: f64,
    /// First time each pair is closer than `threshold`.
    pub times: Vec<Option<usize>>,
    pub synchronized: usize,
    pub fraction: f64,
    pub median_time: Option<f64>,
}

/// Draws Lebesgue-random `(y, x1, x2)` and records when `x1` and `x2`
/// synchronize. Base orbits are refreshed with random low digits.
pub fn sync_statistics(
    f: &SkewSystem,
    pairs: usize,
    n_max: usize,
    threshold: f64,
    seed: u64,
    threads: usize,
) -> Result<SyncStatistics> {
    ensure(pairs >= 1, || "need at least one pair".into())?;
    ensure(threshold > 0.0, || format!("threshold {threshold} must be positive"))?;
    let times = par_indexed(pairs, threads, |i| {
        let mut rng = sample_rng(seed, i);
        let mut y = CirclePoint::new(rng.random::<f64>());
        let mut a = CirclePoint::new(rng.random::<f64>());
        let mut b = CirclePoint::new(rng.random::<f64>());
        for t in 0..=n_max {
            if circle_dist(a, b) < threshold {
                return Some(t);
            }
            a = f.fiber().eval(y, a);
            b = f.fiber().eval(y, b);
            y = f.base().apply_with_fresh_digits(y, &mut rng);
        }
        None
    })?;
    let hit: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
    Ok(SyncStatistics {
        pairs,
        n_max,
        threshold,
        synchronized: hit.len(),
        fraction: hit.len() as f64 / pairs as f64,
        median_time: median(&hit),
        times,
    })
}
