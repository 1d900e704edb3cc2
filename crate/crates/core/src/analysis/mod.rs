//! Experiments on a [`SkewSystem`](crate::SkewSystem): synchronization,
//! Lyapunov exponents, fixed points and contractivity certificates, mixing
//! tests and invariant-graph estimates.
//!
//! Monte Carlo operations take a `seed` and a `threads` count. Sample `i`
//! always draws from `sample_rng(seed, i)` and results are collected in index
//! order, so the output does not depend on `threads`.

mod fixed;
mod graph;
mod mixing;
mod sync;

pub use fixed::{
    fiber_fixed_points, lift_fixed_points, strongly_contractive_check, ContractiveCertificate, ContractiveOutcome,
    FixedPoint, FixedPointKind, FixedPointReport,
};
pub use graph::{
    estimate_graph, graph_separation, graph_survey, marginal_estimate, pullback_concentration, DepthConcentration,
    GraphSample, MarginalEstimate, SeparationSummary,
};
pub use mixing::{invariant_circle_check, mixing_check, MixingReport};
pub use sync::{
    fiber_lyapunov, sync_experiment, sync_run, sync_statistics, uptick_fraction, SyncRun, SyncStatistics,
};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dispersion above which an atom estimate is flagged as low confidence.
pub const LOW_CONFIDENCE_DISPERSION: f64 = 0.1;

/// Burn-in applied to base points of non-linear bases before sampling.
pub const DEFAULT_BURN_IN: usize = 64;

pub(crate) fn burn_in_for(g: &crate::ExpandingBase) -> usize {
    if g.is_linear() {
        0
    } else {
        DEFAULT_BURN_IN
    }
}

/// Runs `f(0), ..., f(n - 1)` on a pool of `threads` workers (0 = all cores)
/// and returns the results in index order.
pub fn par_indexed<T, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n as u64).into_par_iter().map(&f).collect()))
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn par_indexed_keeps_order() {
        let a = par_indexed(100, 1, |i| i * i).unwrap();
        let b = par_indexed(100, 4, |i| i * i).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }
}
