use rand::Rng;
use serde::Serialize;

use super::{burn_in_for, median, par_indexed, LOW_CONFIDENCE_DISPERSION};
use crate::circle::{circle_dist, minimal_covering_arc, CirclePoint};
use crate::error::{ensure, Error, Result};
use crate::measure::{AtomEstimate, EmpiricalCircleMeasure};
use crate::skew::SkewSystem;
use crate::solenoid::{sample_rng, BranchWord, SolenoidRecord, SolenoidSample};

const MIN_GRAPH_DEPTH: usize = 10;

/// Estimates of `omega+` and `omega-` at one solenoid point.
///
/// An estimate is `None` when its cloud has no preferred direction; it is
/// flagged low confidence when its dispersion exceeds
/// [`LOW_CONFIDENCE_DISPERSION`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSample {
    pub sample: SolenoidRecord,
    pub omega_plus: Option<CirclePoint>,
    pub omega_minus: Option<CirclePoint>,
    /// `circle_dist(f_{y0}(omega+(y)), omega+(g y))`, the image estimate
    /// computed from an independent pullback at the advanced point.
    pub residual_plus: Option<f64>,
    pub dispersion_plus: f64,
    pub dispersion_minus: f64,
    pub low_confidence_plus: bool,
    pub low_confidence_minus: bool,
}

impl GraphSample {
    pub fn confident(&self) -> bool {
        !self.low_confidence_plus && !self.low_confidence_minus
    }

    /// `circle_dist(omega+, omega-)` when both estimates are confident.
    pub fn separation(&self) -> Option<f64> {
        match (self.omega_plus, self.omega_minus) {
            (Some(p), Some(m)) if self.confident() => Some(circle_dist(p, m)),
            _ => None,
        }
    }
}

fn split(estimate: Result<AtomEstimate>) -> Result<(Option<CirclePoint>, f64)> {
    match estimate {
        Ok(a) => Ok((Some(a.location), a.dispersion)),
        Err(Error::NoConcentration(_)) => Ok((None, 1.0)),
        Err(e) => Err(e),
    }
}

pub fn estimate_graph(f: &SkewSystem, s: &SolenoidSample, cloud_n: usize) -> Result<GraphSample> {
    let depth = s.depth();
    ensure(depth >= MIN_GRAPH_DEPTH, || format!("solenoid depth {depth} < {MIN_GRAPH_DEPTH}"))?;
    let cloud = EmpiricalCircleMeasure::uniform(cloud_n)?;
    let (omega_plus, dispersion_plus) = split(f.pullback_push(s, &cloud, depth)?.atom_estimate())?;
    let (omega_minus, dispersion_minus) =
        split(f.forward_inverse_pullback(s.y0(), depth, &cloud)?.atom_estimate())?;
    let next = s.advance(f.base()).truncate(depth);
    let (omega_next, _) = split(f.pullback_push(&next, &cloud, depth)?.atom_estimate())?;
    let residual_plus = match (omega_plus, omega_next) {
        (Some(w), Some(w1)) => Some(circle_dist(f.fiber().eval(s.y0(), w), w1)),
        _ => None,
    };
    Ok(GraphSample {
        sample: s.to_record(),
        omega_plus,
        omega_minus,
        residual_plus,
        dispersion_plus,
        dispersion_minus,
        low_confidence_plus: omega_plus.is_none() || dispersion_plus > LOW_CONFIDENCE_DISPERSION,
        low_confidence_minus: omega_minus.is_none() || dispersion_minus > LOW_CONFIDENCE_DISPERSION,
    })
}

/// `estimate_graph` over `n_samples` nu-samples.
pub fn graph_survey(
    f: &SkewSystem,
    n_samples: usize,
    depth: usize,
    cloud_n: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<GraphSample>> {
    let burn_in = burn_in_for(f.base());
    par_indexed(n_samples, threads, |i| {
        let s = SolenoidSample::sample_indexed(f.base(), depth, burn_in, seed, i)?;
        estimate_graph(f, &s, cloud_n)
    })?
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationSummary {
    pub n_samples: usize,
    pub confident: usize,
    pub low_confidence_fraction: f64,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
    /// Among confident samples.
    pub fraction_below_1e3: Option<f64>,
    pub median_residual_plus: Option<f64>,
}

impl SeparationSummary {
    pub fn from_samples(samples: &[GraphSample]) -> Self {
        let seps: Vec<f64> = samples.iter().filter_map(GraphSample::separation).collect();
        let residuals: Vec<f64> = samples.iter().filter_map(|s| s.residual_plus).collect();
        let n = samples.len();
        let below = seps.iter().filter(|&&d| d < 1e-3).count();
        SeparationSummary {
            n_samples: n,
            confident: seps.len(),
            low_confidence_fraction: if n == 0 { 0.0 } else { 1.0 - seps.len() as f64 / n as f64 },
            min: seps.iter().copied().reduce(f64::min),
            median: median(&seps),
            max: seps.iter().copied().reduce(f64::max),
            fraction_below_1e3: (!seps.is_empty()).then(|| below as f64 / seps.len() as f64),
            median_residual_plus: median(&residuals),
        }
    }
}

pub fn graph_separation(
    f: &SkewSystem,
    n_samples: usize,
    depth: usize,
    cloud_n: usize,
    seed: u64,
    threads: usize,
) -> Result<SeparationSummary> {
    ensure(n_samples >= 50, || format!("n_samples {n_samples} < 50"))?;
    Ok(SeparationSummary::from_samples(&graph_survey(
        f, n_samples, depth, cloud_n, seed, threads,
    )?))
}

/// Covering-arc lengths of pulled-back uniform clouds at several depths,
/// all computed along the same backward orbits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthConcentration {
    pub depth: usize,
    pub mass: f64,
    pub lengths: Vec<f64>,
    pub median: f64,
}

impl DepthConcentration {
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        self.lengths.iter().filter(|&&l| l < threshold).count() as f64 / self.lengths.len() as f64
    }
}

pub fn pullback_concentration(
    f: &SkewSystem,
    n_samples: usize,
    depths: &[usize],
    cloud_n: usize,
    mass: f64,
    seed: u64,
    threads: usize,
) -> Result<Vec<DepthConcentration>> {
    ensure(n_samples >= 1, || "need at least one sample".into())?;
    let deepest = depths.iter().copied().max().unwrap_or(0);
    ensure(deepest >= 1, || "need a positive depth".into())?;
    let cloud = EmpiricalCircleMeasure::uniform(cloud_n)?;
    let burn_in = burn_in_for(f.base());
    let rows: Vec<Vec<f64>> = par_indexed(n_samples, threads, |i| {
        let s = SolenoidSample::sample_indexed(f.base(), deepest, burn_in, seed, i)?;
        depths
            .iter()
            .map(|&d| Ok(minimal_covering_arc(f.pullback_push(&s, &cloud, d)?.points(), mass)?.length()))
            .collect::<Result<Vec<f64>>>()
    })?
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(depths
        .iter()
        .enumerate()
        .map(|(j, &depth)| {
            let lengths: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            DepthConcentration {
                depth,
                mass,
                median: median(&lengths).unwrap(),
                lengths,
            }
        })
        .collect())
}

/// `omega+` pooled over random pasts of a fixed base point.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEstimate {
    pub y0: CirclePoint,
    /// Confident estimates with equal weights.
    pub measure: EmpiricalCircleMeasure,
    pub low_confidence: usize,
}

pub fn marginal_estimate(
    f: &SkewSystem,
    y0: CirclePoint,
    n_pasts: usize,
    depth: usize,
    cloud_n: usize,
    seed: u64,
    threads: usize,
) -> Result<MarginalEstimate> {
    ensure(n_pasts >= 100, || format!("n_pasts {n_pasts} < 100"))?;
    ensure(depth >= 1, || "depth must be >= 1".into())?;
    let cloud = EmpiricalCircleMeasure::uniform(cloud_n)?;
    let d = f.base().degree();
    let omegas = par_indexed(n_pasts, threads, |i| {
        let mut rng = sample_rng(seed, i);
        let word = BranchWord::new((0..depth).map(|_| rng.random_range(0..d)).collect());
        let s = SolenoidSample::backward_orbit(f.base(), y0, word)?;
        let (w, disp) = split(f.pullback_push(&s, &cloud, depth)?.atom_estimate())?;
        Ok(w.filter(|_| disp <= LOW_CONFIDENCE_DISPERSION))
    })?
    .into_iter()
    .collect::<Result<Vec<Option<CirclePoint>>>>()?;
    let points: Vec<CirclePoint> = omegas.iter().flatten().copied().collect();
    let low_confidence = n_pasts - points.len();
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(MarginalEstimate {
        y0,
        measure: EmpiricalCircleMeasure::from_points(points)?,
        low_confidence,
    })
}
