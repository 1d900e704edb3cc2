use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use fibersync::commands::{catalog_listing, Command};
use fibersync::RunConfig;

#[derive(Parser)]
#[command(name = "fibersync", version, about = "Experiments on skew products of circle maps over expanding circle maps")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// List the named systems.
    Catalog,
    #[command(flatten)]
    Run(RunAction),
}

#[derive(Subcommand)]
enum RunAction {
    /// Orbit of one point: PGM occupancy bitmap and CSV of the orbit.
    Attractor(RunArgs),
    /// Fiber synchronization time series and random-pair statistics.
    Sync(RunArgs),
    /// Fiber Lyapunov exponents from random starts.
    Lyapunov(RunArgs),
    /// Concentration of pulled-back clouds at several depths.
    Pullback(RunArgs),
    /// Invariant graph estimates, residuals and separation.
    Graph(RunArgs),
    /// Box-to-box first-hit mixing test.
    Mixing(RunArgs),
    /// Strong contractivity certificate search.
    Contractive(RunArgs),
    /// Minimality test of the four-map IFS.
    Ifs(RunArgs),
    /// A command over a grid of fiber amplitudes.
    Sweep(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config; defaults apply to every missing field.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl RunAction {
    fn split(self) -> (Command, RunArgs) {
        match self {
            RunAction::Attractor(a) => (Command::Attractor, a),
            RunAction::Sync(a) => (Command::Sync, a),
            RunAction::Lyapunov(a) => (Command::Lyapunov, a),
            RunAction::Pullback(a) => (Command::Pullback, a),
            RunAction::Graph(a) => (Command::Graph, a),
            RunAction::Mixing(a) => (Command::Mixing, a),
            RunAction::Contractive(a) => (Command::Contractive, a),
            RunAction::Ifs(a) => (Command::Ifs, a),
            RunAction::Sweep(a) => (Command::Sweep, a),
        }
    }
}

fn execute(action: RunAction) -> Result<bool> {
    let (command, args) = action.split();
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    let outcome = fibersync::run(command, &cfg)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    if outcome.refuted {
        eprintln!("{}: claim check failed", command.name());
    }
    Ok(outcome.refuted)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.action {
        Action::Catalog => {
            print!("{}", catalog_listing());
            ExitCode::SUCCESS
        }
        Action::Run(action) => match execute(action) {
            Ok(false) => ExitCode::SUCCESS,
            Ok(true) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
