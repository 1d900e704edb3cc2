use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use fibersync_core::analysis::{
    self, lift_fixed_points, ContractiveOutcome, FixedPointReport, SeparationSummary,
};
use fibersync_core::catalog::CATALOG;
use fibersync_core::{
    sample_rng, CirclePoint, EmpiricalCircleMeasure, FiberFamily, SkewSystem, StepIfs,
};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, SweepCommand};
use crate::output::{cell, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Attractor,
    Sync,
    Lyapunov,
    Pullback,
    Graph,
    Mixing,
    Contractive,
    Ifs,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Attractor => "attractor",
            Command::Sync => "sync",
            Command::Lyapunov => "lyapunov",
            Command::Pullback => "pullback",
            Command::Graph => "graph",
            Command::Mixing => "mixing",
            Command::Contractive => "contractive",
            Command::Ifs => "ifs",
            Command::Sweep => "sweep",
        }
    }
}

/// What a command produced. `refuted` marks a claim check that ran and
/// failed; the binary maps it to exit code 2.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub refuted: bool,
    pub files: Vec<PathBuf>,
    pub result: Value,
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    config: &'a RunConfig,
    system: &'a SkewSystem,
    refuted: bool,
    result: &'a Value,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    let system = cfg.system.resolve()?;
    let sink = Sink::new(&cfg.out, command.name(), cfg.seed)?;
    let mut files = Vec::new();
    let (refuted, result) = match command {
        Command::Attractor => attractor(&system, cfg, &sink, &mut files)?,
        Command::Sync => sync(&system, cfg, &sink, &mut files)?,
        Command::Lyapunov => lyapunov(&system, cfg, &sink, &mut files)?,
        Command::Pullback => pullback(&system, cfg, &sink, &mut files)?,
        Command::Graph => graph(&system, cfg, &sink, &mut files)?,
        Command::Mixing => mixing(&system, cfg, &sink, &mut files)?,
        Command::Contractive => contractive(&system, cfg, &sink, &mut files)?,
        Command::Ifs => ifs(cfg, &sink, &mut files)?,
        Command::Sweep => sweep(&system, cfg, &sink, &mut files)?,
    };
    files.push(sink.write_json(&Document {
        command: command.name(),
        config: cfg,
        system: &system,
        refuted,
        result: &result,
    })?);
    Ok(Outcome { refuted, files, result })
}

pub fn catalog_listing() -> String {
    CATALOG
        .iter()
        .map(|(name, what)| format!("{name:<18} {what}\n"))
        .collect()
}

/// `burn_in` steps from `(y0, x0)`, then `n` recorded points. The base
/// coordinate is refreshed with random low digits at every step.
pub fn attractor_orbit(
    f: &SkewSystem,
    y0: f64,
    x0: f64,
    burn_in: usize,
    n: usize,
    seed: u64,
) -> Vec<(CirclePoint, CirclePoint)> {
    let mut rng = sample_rng(seed, 0);
    let (mut y, mut x) = (CirclePoint::new(y0), CirclePoint::new(x0));
    let mut step = |y: CirclePoint, x: CirclePoint| (f.base().apply_with_fresh_digits(y, &mut rng), f.fiber().eval(y, x));
    for _ in 0..burn_in {
        (y, x) = step(y, x);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push((y, x));
        if i + 1 < n {
            (y, x) = step(y, x);
        }
    }
    out
}

/// Occupied cells of a `k x k` grid, indexed `ix * k + iy`.
pub fn occupancy(points: &[(CirclePoint, CirclePoint)], k: usize) -> Vec<bool> {
    let mut grid = vec![false; k * k];
    let bin = |v: CirclePoint| ((v.value() * k as f64) as usize).min(k - 1);
    for &(y, x) in points {
        grid[bin(x) * k + bin(y)] = true;
    }
    grid
}

pub fn occupancy_fraction(points: &[(CirclePoint, CirclePoint)], k: usize) -> f64 {
    occupancy(points, k).iter().filter(|&&b| b).count() as f64 / (k * k) as f64
}

/// Plain PGM with `y` along rows and `x` increasing upwards; occupied
/// pixels are black.
fn pgm(grid: &[bool], k: usize) -> String {
    let mut s = format!("P2\n{k} {k}\n1\n");
    for ix in (0..k).rev() {
        let row: Vec<&str> = (0..k).map(|iy| if grid[ix * k + iy] { "0" } else { "1" }).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn attractor(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let a = &cfg.attractor;
    let orbit = attractor_orbit(f, a.y0, a.x0, a.burn_in, a.iterations, cfg.seed);
    let grid = occupancy(&orbit, a.resolution);
    files.push(sink.write_csv(
        "t,y,x",
        orbit.iter().enumerate().map(|(t, (y, x))| format!("{t},{y},{x}")),
    )?);
    files.push(sink.write_text("pgm", &pgm(&grid, a.resolution))?);
    let occupied = grid.iter().filter(|&&b| b).count();
    Ok((
        false,
        json!({
            "points": orbit.len(),
            "resolution": a.resolution,
            "occupied_pixels": occupied,
            "occupancy_fraction": occupied as f64 / (a.resolution * a.resolution) as f64,
            "occupancy_fraction_128": occupancy_fraction(&orbit, 128),
        }),
    ))
}

fn sync(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let s = &cfg.sync;
    let xs = EmpiricalCircleMeasure::uniform(s.initial_conditions)?.points().to_vec();
    let run = analysis::sync_run(f, CirclePoint::new(s.y0), &xs, s.iterations)?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..xs.len()).map(|i| format!("x{i}")))
        .chain(std::iter::once("spread".to_string()))
        .collect();
    files.push(sink.write_csv(
        &header.join(","),
        run.xs.iter().zip(&run.spread).enumerate().map(|(t, (row, spread))| {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            format!("{t},{},{spread}", cells.join(","))
        }),
    )?);
    let last = *run.spread.last().unwrap();
    let first_below = run.spread.iter().position(|&v| v < s.threshold);
    let stats = if s.pairs > 0 {
        let st = analysis::sync_statistics(f, s.pairs, s.pair_iterations, s.pair_threshold, cfg.seed, cfg.threads)?;
        json!({
            "pairs": st.pairs,
            "n_max": st.n_max,
            "threshold": st.threshold,
            "synchronized": st.synchronized,
            "fraction": st.fraction,
            "median_time": st.median_time,
        })
    } else {
        Value::Null
    };
    let refuted = !(last < s.threshold);
    Ok((
        refuted,
        json!({
            "final_spread": last,
            "first_below_threshold": first_below,
            "uptick_fraction": analysis::uptick_fraction(&run.spread, s.threshold),
            "synchronized": !refuted,
            "pair_statistics": stats,
        }),
    ))
}

fn random_lyapunov(f: &SkewSystem, starts: usize, n: usize, seed: u64, threads: usize) -> Result<Vec<(f64, f64, f64)>> {
    let rows = analysis::par_indexed(starts, threads, |i| {
        let mut rng = sample_rng(seed, i);
        let (y, x) = (rng.random::<f64>(), rng.random::<f64>());
        analysis::fiber_lyapunov(f, CirclePoint::new(y), CirclePoint::new(x), n).map(|l| (y, x, l))
    })?;
    rows.into_iter().collect::<fibersync_core::Result<_>>().map_err(Into::into)
}

fn lyapunov(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let l = &cfg.lyapunov;
    let rows = random_lyapunov(f, l.starts, l.iterations, cfg.seed, cfg.threads)?;
    files.push(sink.write_csv(
        "start,y0,x0,exponent",
        rows.iter().enumerate().map(|(i, (y, x, e))| format!("{i},{y},{x},{e}")),
    )?);
    let es: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok((
        false,
        json!({
            "iterations": l.iterations,
            "mean": es.iter().sum::<f64>() / es.len() as f64,
            "min": es.iter().copied().fold(f64::INFINITY, f64::min),
            "max": es.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }),
    ))
}

fn pullback(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let p = &cfg.pullback;
    let rows = analysis::pullback_concentration(f, p.samples, &p.depths, p.cloud, p.mass, cfg.seed, cfg.threads)?;
    files.push(sink.write_csv(
        "sample,depth,length",
        (0..p.samples).flat_map(|i| rows.iter().map(move |r| format!("{i},{},{}", r.depth, r.lengths[i]))),
    )?);
    let per_depth: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "depth": r.depth,
                "median_length": r.median,
                "fraction_below_threshold": r.fraction_below(p.threshold),
            })
        })
        .collect();
    Ok((false, json!({ "mass": p.mass, "threshold": p.threshold, "depths": per_depth })))
}

fn graph(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let g = &cfg.graph;
    let samples = analysis::graph_survey(f, g.samples, g.depth, g.cloud, cfg.seed, cfg.threads)?;
    files.push(sink.write_csv(
        "sample,y0,omega_plus,omega_minus,residual_plus,dispersion_plus,dispersion_minus,low_confidence_plus,low_confidence_minus,separation",
        samples.iter().enumerate().map(|(i, s)| {
            format!(
                "{i},{},{},{},{},{},{},{},{},{}",
                s.sample.y0,
                cell(s.omega_plus),
                cell(s.omega_minus),
                cell(s.residual_plus),
                s.dispersion_plus,
                s.dispersion_minus,
                s.low_confidence_plus,
                s.low_confidence_minus,
                cell(s.separation()),
            )
        }),
    )?);
    let summary = SeparationSummary::from_samples(&samples);
    let marginal = match &g.marginal {
        None => Value::Null,
        Some(m) => {
            let est = analysis::marginal_estimate(
                f,
                CirclePoint::new(m.y0),
                m.pasts,
                g.depth,
                g.cloud,
                cfg.seed,
                cfg.threads,
            );
            match est {
                Ok(est) => json!({
                    "y0": m.y0,
                    "pasts": m.pasts,
                    "pooled": est.measure.len(),
                    "low_confidence": est.low_confidence,
                    "delta": m.delta,
                    "support_coverage": est.measure.support_coverage(m.delta)?,
                    "max_atom_mass": est.measure.max_atom_mass(m.delta)?,
                }),
                Err(fibersync_core::Error::EmptySample) => json!({
                    "y0": m.y0,
                    "pasts": m.pasts,
                    "pooled": 0,
                    "low_confidence": m.pasts,
                }),
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok((false, json!({ "summary": summary, "marginal": marginal })))
}

fn mixing(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let m = &cfg.mixing;
    let r = analysis::mixing_check(f, m.k, m.particles_per_box, m.n_max, cfg.seed, cfg.threads)?;
    let k = r.k;
    files.push(sink.write_csv(
        "source_iy,source_ix,target_iy,target_ix,first_hit",
        r.first_hit.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .enumerate()
                .map(move |(v, hit)| format!("{},{},{},{},{}", u / k, u % k, v / k, v % k, cell(*hit)))
        }),
    )?);
    Ok((
        !r.verdict,
        json!({
            "semantics": "verdict false: some grid box is never reached from some other box within n_max steps \
                          (a refutation at this resolution); verdict true: evidence of mixing, not a proof",
            "report": r,
        }),
    ))
}

fn contractive(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let c = &cfg.contractive;
    let out = analysis::strongly_contractive_check(f, c.eps, c.k_max, c.n_max)?;
    let (refuted, verified) = match &out {
        ContractiveOutcome::Certificate(cert) => {
            let (mut ya, mut a) = (cert.y_hat, cert.v.start());
            let (mut yb, mut b) = (cert.y_hat, cert.v.end());
            let mut rows = vec![format!("0,{a},{b},{}", cert.v.length())];
            for step in 1..=cert.n {
                (ya, a) = f.step(ya, a);
                (yb, b) = f.step(yb, b);
                rows.push(format!("{step},{a},{b},{}", a.ccw_offset(b)));
            }
            files.push(sink.write_csv("step,start,end,length", rows)?);
            let ok = cert.verify(f);
            (!ok, Some(ok))
        }
        ContractiveOutcome::NotFound { .. } => {
            files.push(sink.write_csv("step,start,end,length", Vec::new())?);
            (true, None)
        }
    };
    Ok((refuted, json!({ "outcome": out, "verified": verified })))
}

fn generator_report(ifs: &StepIfs, k: usize) -> Result<FixedPointReport> {
    Ok(lift_fixed_points(|x| ifs.map_lift(k, x), |x| ifs.map_deriv(k, x))?)
}

fn ifs(cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let i = &cfg.ifs;
    let built = StepIfs::build(i.params, i.degree).context("field `ifs.params`")?;
    let report = built.minimality_test(&i.alphabet, i.word_length, i.delta, cfg.seed)?;
    let n = report.histogram.len();
    files.push(sink.write_csv(
        "bin,lower,count",
        report.histogram.iter().enumerate().map(|(b, c)| format!("{b},{},{c}", b as f64 / n as f64)),
    )?);
    let generators = (0..4)
        .map(|k| Ok(json!({ "generator": k, "fixed_points": generator_report(&built, k)? })))
        .collect::<Result<Vec<Value>>>()?;
    Ok((
        !report.dense,
        json!({
            "dense": report.dense,
            "delta": report.delta,
            "word_length": report.word_length,
            "alphabet": i.alphabet,
            "repeller_slopes": built.repeller_slopes(),
            "generators": generators,
        }),
    ))
}

/// The system with its fiber amplitude replaced by `a`.
pub fn with_amplitude(f: &SkewSystem, a: f64) -> Result<SkewSystem> {
    let fiber = match f.fiber() {
        FiberFamily::SineCoupled { .. } => FiberFamily::sine_coupled(a)?,
        FiberFamily::NorthSouth { .. } => FiberFamily::north_south(a)?,
        other => bail!("sweep needs a sine_coupled or north_south fiber, got {}", other.name()),
    };
    Ok(SkewSystem::new(f.base().clone(), fiber)?)
}

fn sweep(f: &SkewSystem, cfg: &RunConfig, sink: &Sink, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let w = &cfg.sweep;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for a in w.amplitudes() {
        let g = with_amplitude(f, a)?;
        let metrics: Vec<(&str, Option<f64>)> = match w.command {
            SweepCommand::Sync => {
                let s = &cfg.sync;
                let xs = EmpiricalCircleMeasure::uniform(s.initial_conditions)?.points().to_vec();
                let series = analysis::sync_experiment(&g, CirclePoint::new(s.y0), &xs, s.iterations)?;
                vec![
                    ("final_spread", series.last().copied()),
                    ("uptick_fraction", Some(analysis::uptick_fraction(&series, s.threshold))),
                ]
            }
            SweepCommand::Lyapunov => {
                let l = &cfg.lyapunov;
                let es = random_lyapunov(&g, l.starts, l.iterations, cfg.seed, cfg.threads)?;
                vec![("mean_exponent", Some(es.iter().map(|r| r.2).sum::<f64>() / es.len() as f64))]
            }
            SweepCommand::Graph => {
                let gc = &cfg.graph;
                let s = analysis::graph_separation(&g, gc.samples, gc.depth, gc.cloud, cfg.seed, cfg.threads)?;
                vec![
                    ("median_residual_plus", s.median_residual_plus),
                    ("median_separation", s.median),
                    ("low_confidence_fraction", Some(s.low_confidence_fraction)),
                ]
            }
            SweepCommand::Mixing => {
                let m = &cfg.mixing;
                let r = analysis::mixing_check(&g, m.k, m.particles_per_box, m.n_max, cfg.seed, cfg.threads)?;
                vec![
                    ("verdict", Some(if r.verdict { 1.0 } else { 0.0 })),
                    ("missing_pairs", Some(r.missing_pairs as f64)),
                ]
            }
        };
        for (name, v) in &metrics {
            rows.push(format!("{a},{name},{}", cell(*v)));
        }
        let mut obj = serde_json::Map::new();
        obj.insert("amplitude".into(), json!(a));
        for (name, v) in metrics {
            obj.insert(name.into(), json!(v));
        }
        cells.push(Value::Object(obj));
    }
    files.push(sink.write_csv("amplitude,metric,value", rows)?);
    Ok((false, json!({ "command": w.command, "cells": cells })))
}
