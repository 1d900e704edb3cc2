//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported but only fail the test run when
//! `ACCEPTANCE_STRICT=1` is set.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fibersync::commands::{attractor_orbit, occupancy_fraction};
use fibersync::config::{GraphConfig, MixingConfig, PullbackConfig, SyncConfig};
use fibersync::{run, Command, RunConfig};
use fibersync_core::analysis::*;
use fibersync_core::catalog::{flagship, make_named};
use fibersync_core::{
    circle_dist, minimal_covering_arc, sample_rng, wasserstein_circle, CirclePoint, EmpiricalCircleMeasure,
    FiberFamily, StepIfs, StepIfsParams,
};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> (Verdict, Duration, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed(), limit)
}

fn twenty() -> Vec<CirclePoint> {
    EmpiricalCircleMeasure::uniform(20).unwrap().points().to_vec()
}

fn c1() -> Verdict {
    let orbit = attractor_orbit(&flagship(), 0.123456789, 0.987654321, 1000, 10_000, 1);
    let occ = occupancy_fraction(&orbit, 128);
    verdict(occ > 0.95, format!("10^4-point orbit occupies {:.4} of 128x128 boxes (need > 0.95)", occ))
}

fn c2() -> Verdict {
    let s = sync_experiment(&flagship(), CirclePoint::new(0.371), &twenty(), 200).unwrap();
    let first = s.iter().position(|&v| v < 1e-3);
    let up = uptick_fraction(&s, 1e-3);
    verdict(
        first.is_some() && up <= 0.10,
        format!(
            "spread below 1e-3 at t = {} (need <= 200); up-ticks before that {:.3} (need <= 0.10)",
            first.map_or("never".into(), |t| t.to_string()),
            up
        ),
    )
}

fn c3() -> Verdict {
    let st = sync_statistics(&flagship(), 1000, 1000, 1e-6, 3, 0).unwrap();
    verdict(
        st.fraction >= 0.99,
        format!("{}/{} random pairs below 1e-6 within 1000 steps (need >= 99%)", st.synchronized, st.pairs),
    )
}

fn c4() -> Verdict {
    let rows = pullback_concentration(&flagship(), 200, &[20, 40], 1000, 0.9, 4, 0).unwrap();
    let frac = rows[1].fraction_below(1e-3);
    verdict(
        frac >= 0.9 && rows[1].median <= rows[0].median,
        format!(
            "depth 40: {:.3} of samples have covering arc < 1e-3 (need >= 0.90); median {:.2e} at depth 40 vs {:.2e} at depth 20",
            frac, rows[1].median, rows[0].median
        ),
    )
}

fn c5() -> Verdict {
    let samples = graph_survey(&flagship(), 200, 40, 1000, 5, 0).unwrap();
    let s = SeparationSummary::from_samples(&samples);
    let (res, sep, below) = (
        s.median_residual_plus.unwrap_or(f64::INFINITY),
        s.median.unwrap_or(0.0),
        s.fraction_below_1e3.unwrap_or(1.0),
    );
    verdict(
        res < 1e-3 && sep > 0.01 && below < 0.05,
        format!(
            "median residual {:.2e} (< 1e-3); median separation {:.3} (> 0.01); below 1e-3 {:.3} (< 0.05); {} of 200 confident",
            res, sep, below, s.confident
        ),
    )
}

fn c6() -> Verdict {
    let f = flagship();
    match strongly_contractive_check(&f, 0.05, 3, 1000).unwrap() {
        ContractiveOutcome::Certificate(c) => {
            let ok = c.y_hat == CirclePoint::ZERO && c.k == 1 && c.verify(&f);
            verdict(
                ok,
                format!(
                    "certificate at y = {}, k = {}, |V| = {}, image {:.2e} after {} steps, re-verified: {}",
                    c.y_hat,
                    c.k,
                    c.v.length(),
                    c.image_length,
                    c.n,
                    c.verify(&f)
                ),
            )
        }
        ContractiveOutcome::NotFound { message, .. } => verdict(false, message),
    }
}

fn c7() -> Verdict {
    let dev = invariant_circle_check(3, 2, 10_000, 7).unwrap();
    let m = mixing_check(&make_named("shear(3,2)").unwrap(), 16, 25, 40, 7, 0).unwrap();
    let rot = make_named("rotation(3)").unwrap();
    let mut rng = sample_rng(7, 0);
    let lyap_zero = (0..20).all(|_| {
        let (y, x) = (rng.random::<f64>(), rng.random::<f64>());
        fiber_lyapunov(&rot, CirclePoint::new(y), CirclePoint::new(x), 1000).unwrap() == 0.0
    });
    let xs: Vec<CirclePoint> = (0..20).map(|i| CirclePoint::new(i as f64 / 32.0)).collect();
    let s = sync_experiment(&rot, CirclePoint::new(0.375), &xs, 200).unwrap();
    let constant = s.iter().all(|&v| v == s[0]);
    verdict(
        dev < 1e-12 && !m.verdict && m.witness.is_some() && lyap_zero && constant,
        format!(
            "2x-2y drift {:.1e}; shear(3,2) mixing verdict {} witness {:?}; rotation exponent exactly 0: {}; spread constant: {}",
            dev,
            m.verdict,
            m.witness.map(|w| ((w.source.iy, w.source.ix), (w.target.iy, w.target.ix))),
            lyap_zero,
            constant
        ),
    )
}

fn c8(name: &str, k: usize, n_max: usize) -> Verdict {
    let r = mixing_check(&make_named(name).unwrap(), k, 1000, n_max, 8, 0).unwrap();
    verdict(
        r.verdict,
        format!(
            "{name}: k = {k}, n_max = {n_max}, 1000 particles per box: missing pairs {}, latest first hit {:?}",
            r.missing_pairs, r.latest_first_hit
        ),
    )
}

fn c9() -> Verdict {
    let m = marginal_estimate(&flagship(), CirclePoint::new(0.371), 500, 40, 1000, 9, 0).unwrap();
    let cov = m.measure.support_coverage(0.05).unwrap();
    let atom = m.measure.max_atom_mass(0.05).unwrap();
    verdict(
        cov == 1.0 && atom < 0.2,
        format!(
            "support_coverage(0.05) = {cov} (need 1.0); max_atom_mass(0.05) = {atom:.3} (need < 0.2); {} pasts pooled",
            m.measure.len()
        ),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn c10() -> Verdict {
    let mut rng = sample_rng(10, 0);
    let mut w_bad = 0;
    let perms: Vec<Vec<Vec<usize>>> = (0..=6).map(permutations).collect();
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let a: Vec<CirclePoint> = (0..n).map(|_| CirclePoint::new(rng.random())).collect();
        let b: Vec<CirclePoint> = (0..n).map(|_| CirclePoint::new(rng.random())).collect();
        let brute = perms[n]
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| circle_dist(a[i], b[j])).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
            / n as f64;
        let w = wasserstein_circle(
            &EmpiricalCircleMeasure::from_points(a).unwrap(),
            &EmpiricalCircleMeasure::from_points(b).unwrap(),
        )
        .unwrap();
        if (w - brute).abs() > 1e-12 {
            w_bad += 1;
        }
    }

    let mut arc_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=40);
        let pts: Vec<CirclePoint> = (0..n).map(|_| CirclePoint::new(rng.random())).collect();
        let mass: f64 = 1.0 - rng.random::<f64>();
        let needed = ((mass * n as f64).ceil() as usize).clamp(1, n);
        let brute = pts
            .iter()
            .map(|&p| {
                let mut offs: Vec<f64> = pts.iter().map(|&q| p.ccw_offset(q)).collect();
                offs.sort_by(f64::total_cmp);
                offs[needed - 1]
            })
            .fold(f64::INFINITY, f64::min);
        let arc = minimal_covering_arc(&pts, mass).unwrap();
        let covered = pts.iter().filter(|&&p| arc.contains(p)).count();
        if (arc.length() - brute).abs() > 1e-12 || covered < needed {
            arc_bad += 1;
        }
    }

    let ifs = StepIfs::build(StepIfsParams::default(), 4).unwrap();
    let families = [
        FiberFamily::sine_coupled(0.125).unwrap(),
        FiberFamily::sine_coupled(0.15).unwrap(),
        FiberFamily::RigidRotation,
        FiberFamily::LinearShear { j: 2 },
        FiberFamily::north_south(0.1).unwrap(),
        FiberFamily::StepIfs(ifs.clone()),
    ];
    let (mut fd_worst, mut inv_worst): (f64, f64) = (0.0, 0.0);
    for f in &families {
        for _ in 0..1000 {
            let (y, x) = (CirclePoint::new(rng.random()), rng.random::<f64>());
            let h = 1e-6;
            let skip = matches!(f, FiberFamily::StepIfs(_)) && ifs.near_joint(y.value(), x, 2.0 * h);
            if !skip {
                let fd = (f.lift(y, x + h) - f.lift(y, x - h)) / (2.0 * h);
                fd_worst = fd_worst.max((fd - f.deriv(y, CirclePoint::new(x))).abs());
            }
            let back = f.invert(y, f.eval(y, CirclePoint::new(x))).unwrap();
            inv_worst = inv_worst.max(circle_dist(back, CirclePoint::new(x)));
        }
    }
    verdict(
        w_bad == 0 && arc_bad == 0 && fd_worst < 1e-6 && inv_worst < 1e-10,
        format!(
            "wasserstein mismatches {w_bad}/1000; covering-arc mismatches {arc_bad}/1000; \
             worst |deriv - FD| {fd_worst:.1e}; worst invert roundtrip {inv_worst:.1e}"
        ),
    )
}

fn c11() -> Verdict {
    let cfg = RunConfig {
        system: fibersync::config::SystemSpec::Named("flagship".into()),
        seed: 11,
        sync: SyncConfig {
            pairs: 200,
            ..Default::default()
        },
        pullback: PullbackConfig {
            samples: 50,
            ..Default::default()
        },
        graph: GraphConfig {
            samples: 50,
            depth: 20,
            cloud: 300,
            ..Default::default()
        },
        mixing: MixingConfig {
            k: 8,
            particles_per_box: 100,
            n_max: 30,
        },
        ..Default::default()
    };
    let mut diffs = Vec::new();
    for command in [Command::Sync, Command::Pullback, Command::Graph, Command::Mixing, Command::Attractor] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let one = run(command, &RunConfig { out: a.path().into(), threads: 1, ..cfg.clone() }).unwrap();
        let many = run(command, &RunConfig { out: b.path().into(), threads: 4, ..cfg.clone() }).unwrap();
        for (x, y) in one.files.iter().zip(&many.files) {
            if fs::read(x).unwrap() != fs::read(y).unwrap() {
                diffs.push(format!("{}", x.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    verdict(
        diffs.is_empty(),
        format!("sync, pullback, graph, mixing, attractor at 1 vs 4 threads: differing files {diffs:?}"),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: Vec<(&str, Box<dyn FnOnce() -> (Verdict, Duration, Duration)>)> = vec![
        ("1  orbit density", Box::new(|| timed(secs(1), c1))),
        ("2  fiber synchronization trace", Box::new(|| timed(secs(1), c2))),
        ("3  synchronization statistics", Box::new(|| timed(secs(10), c3))),
        ("4  pullback delta convergence", Box::new(|| timed(secs(60), c4))),
        ("5  invariant graph", Box::new(|| timed(secs(120), c5))),
        ("6  strong contractivity", Box::new(|| timed(secs(1), c6))),
        ("7  non-transitive controls", Box::new(|| timed(secs(60), c7))),
        ("8a mixing, flagship", Box::new(|| timed(secs(120), || c8("flagship", 16, 40)))),
        ("8b mixing, step IFS", Box::new(|| timed(secs(120), || c8("stepifs", 8, 60)))),
        ("9  marginal support", Box::new(|| timed(secs(120), c9))),
        ("10 oracle equivalences", Box::new(|| timed(secs(60), c10))),
        ("11 determinism", Box::new(|| timed(secs(300), c11))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (v, took, limit) = check();
        let pass = v.pass && took <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.2} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {failed} criteria failed");
    if failed == 0 || std::env::var("ACCEPTANCE_STRICT").map_or(true, |v| v != "1") {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
