//! Run configuration: a system descriptor, a seed and one optional section
//! per command. Every section has defaults, so `{"system": "flagship"}` is
//! a complete config.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fibersync_core::catalog::make_named;
use fibersync_core::{SkewSystem, StepIfsParams};
use serde::{Deserialize, Serialize};

/// A catalog name such as `"shear(3,2)"` or a full `{base, fiber}` object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Named(String),
    Explicit(SkewSystem),
}

impl SystemSpec {
    pub fn resolve(&self) -> Result<SkewSystem> {
        match self {
            SystemSpec::Named(name) => make_named(name).with_context(|| format!("field `system`: {name}")),
            SystemSpec::Explicit(s) => Ok(s.clone()),
        }
    }
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Named("flagship".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttractorConfig {
    pub y0: f64,
    pub x0: f64,
    pub burn_in: usize,
    pub iterations: usize,
    /// Side of the occupancy bitmap.
    pub resolution: usize,
}

impl Default for AttractorConfig {
    fn default() -> Self {
        AttractorConfig {
            y0: 0.123456789,
            x0: 0.987654321,
            burn_in: 1000,
            iterations: 10_000,
            resolution: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyncConfig {
    pub y0: f64,
    /// Number of equidistant fiber initial conditions.
    pub initial_conditions: usize,
    pub iterations: usize,
    pub threshold: f64,
    /// Random pairs for the synchronization statistics (0 = skip).
    pub pairs: usize,
    pub pair_iterations: usize,
    pub pair_threshold: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig {
            y0: 0.371,
            initial_conditions: 20,
            iterations: 200,
            threshold: 1e-3,
            pairs: 1000,
            pair_iterations: 1000,
            pair_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovConfig {
    /// Random starting points.
    pub starts: usize,
    pub iterations: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        LyapunovConfig {
            starts: 10,
            iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PullbackConfig {
    pub samples: usize,
    pub depths: Vec<usize>,
    pub cloud: usize,
    pub mass: f64,
    pub threshold: f64,
}

impl Default for PullbackConfig {
    fn default() -> Self {
        PullbackConfig {
            samples: 200,
            depths: vec![10, 20, 30, 40],
            cloud: 1000,
            mass: 0.9,
            threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginalConfig {
    pub y0: f64,
    pub pasts: usize,
    pub delta: f64,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        MarginalConfig {
            y0: 0.371,
            pasts: 500,
            delta: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub samples: usize,
    pub depth: usize,
    pub cloud: usize,
    /// Pooled marginal of `omega+` at a fixed base point; omitted when null.
    pub marginal: Option<MarginalConfig>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            samples: 200,
            depth: 40,
            cloud: 1000,
            marginal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingConfig {
    pub k: usize,
    pub particles_per_box: usize,
    pub n_max: usize,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig {
            k: 16,
            particles_per_box: 1000,
            n_max: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContractiveConfig {
    pub eps: f64,
    pub k_max: usize,
    pub n_max: usize,
}

impl Default for ContractiveConfig {
    fn default() -> Self {
        ContractiveConfig {
            eps: 0.05,
            k_max: 3,
            n_max: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IfsConfig {
    pub params: StepIfsParams,
    pub degree: u32,
    pub alphabet: Vec<usize>,
    pub word_length: usize,
    pub delta: f64,
}

impl Default for IfsConfig {
    fn default() -> Self {
        IfsConfig {
            params: StepIfsParams::default(),
            degree: 4,
            alphabet: vec![0, 1, 2, 3],
            word_length: 100_000,
            delta: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCommand {
    Sync,
    Lyapunov,
    Graph,
    Mixing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub command: SweepCommand,
    pub amplitude_start: f64,
    pub amplitude_stop: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            command: SweepCommand::Lyapunov,
            amplitude_start: 0.0,
            amplitude_stop: 0.15,
            steps: 16,
        }
    }
}

impl SweepConfig {
    pub fn amplitudes(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.amplitude_start];
        }
        let h = (self.amplitude_stop - self.amplitude_start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.amplitude_start + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub seed: u64,
    /// Output directory; not part of the embedded config.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Worker cap (0 = all cores); not part of the embedded config.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub attractor: AttractorConfig,
    pub sync: SyncConfig,
    pub lyapunov: LyapunovConfig,
    pub pullback: PullbackConfig,
    pub graph: GraphConfig,
    pub mixing: MixingConfig,
    pub contractive: ContractiveConfig,
    pub ifs: IfsConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemSpec::default(),
            seed: 1,
            out: PathBuf::from("."),
            threads: 0,
            attractor: Default::default(),
            sync: Default::default(),
            lyapunov: Default::default(),
            pullback: Default::default(),
            graph: Default::default(),
            mixing: Default::default(),
            contractive: Default::default(),
            ifs: Default::default(),
            sweep: Default::default(),
        }
    }
}

fn check(ok: bool, field: &str, why: &str) -> Result<()> {
    if !ok {
        bail!("field `{field}`: {why}");
    }
    Ok(())
}

fn unit(x: f64) -> bool {
    (0.0..1.0).contains(&x)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Checks every section against the preconditions of its operation.
    pub fn validate(&self) -> Result<()> {
        self.system.resolve()?;
        let a = &self.attractor;
        check(a.iterations >= 1, "attractor.iterations", "must be >= 1")?;
        check(a.resolution >= 1, "attractor.resolution", "must be >= 1")?;
        check(unit(a.y0) && unit(a.x0), "attractor.y0/x0", "must lie in [0, 1)")?;
        let s = &self.sync;
        check(s.initial_conditions >= 2, "sync.initial_conditions", "must be >= 2")?;
        check(unit(s.y0), "sync.y0", "must lie in [0, 1)")?;
        check(s.threshold > 0.0, "sync.threshold", "must be positive")?;
        check(s.pair_threshold > 0.0, "sync.pair_threshold", "must be positive")?;
        check(self.lyapunov.iterations >= 1, "lyapunov.iterations", "must be >= 1")?;
        check(self.lyapunov.starts >= 1, "lyapunov.starts", "must be >= 1")?;
        let p = &self.pullback;
        check(p.samples >= 1, "pullback.samples", "must be >= 1")?;
        check(!p.depths.is_empty() && p.depths.iter().all(|&d| d >= 1), "pullback.depths", "need positive depths")?;
        check(p.cloud >= 1, "pullback.cloud", "must be >= 1")?;
        check(p.mass > 0.0 && p.mass <= 1.0, "pullback.mass", "must lie in (0, 1]")?;
        let g = &self.graph;
        check(g.samples >= 50, "graph.samples", "must be >= 50")?;
        check(g.depth >= 10, "graph.depth", "must be >= 10")?;
        check(g.cloud >= 1, "graph.cloud", "must be >= 1")?;
        if let Some(m) = &g.marginal {
            check(m.pasts >= 100, "graph.marginal.pasts", "must be >= 100")?;
            check(unit(m.y0), "graph.marginal.y0", "must lie in [0, 1)")?;
            check(m.delta > 0.0 && m.delta <= 1.0, "graph.marginal.delta", "must lie in (0, 1]")?;
        }
        let m = &self.mixing;
        check(m.k >= 4, "mixing.k", "must be >= 4")?;
        check(m.particles_per_box >= 25, "mixing.particles_per_box", "must be >= 25")?;
        let c = &self.contractive;
        check(c.eps > 0.0 && c.eps < 0.5, "contractive.eps", "must lie in (0, 1/2)")?;
        check(c.k_max >= 1, "contractive.k_max", "must be >= 1")?;
        let i = &self.ifs;
        check(i.word_length >= 1000, "ifs.word_length", "must be >= 1000")?;
        check(i.delta > 0.0 && i.delta <= 1.0, "ifs.delta", "must lie in (0, 1]")?;
        check(i.degree >= 4, "ifs.degree", "must be >= 4")?;
        check(!i.alphabet.is_empty() && i.alphabet.iter().all(|&k| k < 4), "ifs.alphabet", "digits must lie in 0..4")?;
        i.params.validate().context("field `ifs.params`")?;
        let w = &self.sweep;
        check(w.steps >= 1, "sweep.steps", "must be >= 1")?;
        check(w.amplitude_start <= w.amplitude_stop, "sweep.amplitude_start", "must not exceed amplitude_stop")?;
        Ok(())
    }
}
