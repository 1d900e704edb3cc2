use serde::Serialize;

use crate::circle::{dist_to_integer, CircleArc, CirclePoint};
use crate::error::{ensure, Error, Result};
use crate::skew::SkewSystem;

const SCAN_GRID: usize = 4096;
const ROOT_BISECTIONS: usize = 80;
const NEUTRAL_TOL: f64 = 1e-8;
const DEGENERATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Attracting,
    Repelling,
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub x_star: CirclePoint,
    pub multiplier: f64,
    pub kind: FixedPointKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FixedPointReport {
    pub points: Vec<FixedPoint>,
}

impl FixedPointReport {
    pub fn of_kind(&self, kind: FixedPointKind) -> impl Iterator<Item = &FixedPoint> {
        self.points.iter().filter(move |p| p.kind == kind)
    }

    pub fn attracting(&self) -> Vec<FixedPoint> {
        self.of_kind(FixedPointKind::Attracting).copied().collect()
    }

    pub fn repelling(&self) -> Vec<FixedPoint> {
        self.of_kind(FixedPointKind::Repelling).copied().collect()
    }
}

fn classify(multiplier: f64) -> FixedPointKind {
    if (multiplier - 1.0).abs() <= NEUTRAL_TOL {
        FixedPointKind::Neutral
    } else if multiplier < 1.0 {
        FixedPointKind::Attracting
    } else {
        FixedPointKind::Repelling
    }
}

/// Fixed points of the circle map with lift `lift`: zeros of
/// `lift(x) - x - m` for integers `m`, found by a sign-change scan on a
/// 4096-point grid and bisection.
pub fn lift_fixed_points(lift: impl Fn(f64) -> f64, deriv: impl Fn(f64) -> f64) -> Result<FixedPointReport> {
    let h = 1.0 / SCAN_GRID as f64;
    let disp: Vec<f64> = (0..=SCAN_GRID).map(|i| lift(i as f64 * h) - i as f64 * h).collect();
    if disp.iter().all(|&v| dist_to_integer(v) < DEGENERATE_TOL) {
        return Err(Error::Degenerate);
    }
    let lo = disp.iter().copied().fold(f64::INFINITY, f64::min).ceil() as i64;
    let hi = disp.iter().copied().fold(f64::NEG_INFINITY, f64::max).floor() as i64;
    let mut roots = Vec::new();
    for m in lo..=hi {
        let m = m as f64;
        for i in 0..SCAN_GRID {
            let (a, b) = (disp[i] - m, disp[i + 1] - m);
            let x0 = i as f64 * h;
            if a == 0.0 {
                roots.push(x0);
            } else if a * b < 0.0 {
                let (mut l, mut r) = (x0, x0 + h);
                let rising = a < 0.0;
                for _ in 0..ROOT_BISECTIONS {
                    let mid = 0.5 * (l + r);
                    let v = lift(mid) - mid - m;
                    if (v < 0.0) == rising {
                        l = mid;
                    } else {
                        r = mid;
                    }
                }
                roots.push(0.5 * (l + r));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    let points = roots
        .into_iter()
        .map(|x| {
            let multiplier = deriv(x);
            FixedPoint {
                x_star: CirclePoint::new(x),
                multiplier,
                kind: classify(multiplier),
            }
        })
        .collect();
    Ok(FixedPointReport { points })
}

/// Orbit `y_hat, g(y_hat), ..., g^{k-1}(y_hat)`.
fn base_orbit(f: &SkewSystem, y_hat: CirclePoint, k: usize) -> Vec<CirclePoint> {
    std::iter::successors(Some(y_hat), |&y| Some(f.base().apply(y))).take(k).collect()
}

fn compose_lift(f: &SkewSystem, orbit: &[CirclePoint], x: f64) -> f64 {
    orbit.iter().fold(x, |x, &y| f.fiber().lift(y, x))
}

fn compose_deriv(f: &SkewSystem, orbit: &[CirclePoint], x: f64) -> f64 {
    let mut d = 1.0;
    let mut x = x;
    for &y in orbit {
        d *= f.fiber().deriv_lift(y, x);
        x = f.fiber().lift(y, x);
    }
    d
}

/// Fixed points of `f^k_{y_hat}` for a `g^k`-periodic `y_hat`.
pub fn fiber_fixed_points(f: &SkewSystem, y_hat: CirclePoint, k: usize) -> Result<FixedPointReport> {
    ensure(k >= 1, || "period must be >= 1".into())?;
    let orbit = base_orbit(f, y_hat, k);
    let back = f.base().apply(*orbit.last().unwrap());
    ensure(crate::circle::circle_dist(back, y_hat) < 1e-9, || {
        format!("{y_hat} is not periodic with period {k}")
    })?;
    lift_fixed_points(|x| compose_lift(f, &orbit, x), |x| compose_deriv(f, &orbit, x))
}

/// Arc `V` of length `> 1 - eps` whose image under `n` fiber steps over the
/// periodic orbit of `y_hat` has length `< eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractiveCertificate {
    pub eps: f64,
    pub y_hat: CirclePoint,
    pub k: usize,
    pub v: CircleArc,
    /// Number of fiber steps, a multiple of `k`.
    pub n: usize,
    pub image_length: f64,
    pub attractor: CirclePoint,
    pub repeller: CirclePoint,
}

impl ContractiveCertificate {
    /// Re-checks the certificate by stepping the endpoints of `V` with `F`.
    pub fn verify(&self, f: &SkewSystem) -> bool {
        if !(self.v.length() > 1.0 - self.eps) {
            return false;
        }
        let (mut ya, mut a) = (self.y_hat, self.v.start());
        let (mut yb, mut b) = (self.y_hat, self.v.end());
        for _ in 0..self.n {
            (ya, a) = f.step(ya, a);
            (yb, b) = f.step(yb, b);
        }
        a.ccw_offset(b) < self.eps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ContractiveOutcome {
    Certificate(ContractiveCertificate),
    NotFound { k_max: usize, message: String },
}

/// Searches periodic base points of period `k <= k_max` for an
/// attracting/repelling pair of `f^k_{y_hat}` and shrinks the complement of
/// a small arc around the repeller.
pub fn strongly_contractive_check(f: &SkewSystem, eps: f64, k_max: usize, n_max: usize) -> Result<ContractiveOutcome> {
    ensure(eps > 0.0 && eps < 0.5, || format!("eps {eps} outside (0, 1/2)"))?;
    for k in 1..=k_max {
        for y_hat in f.base().periodic_points(k as u32)? {
            let report = match fiber_fixed_points(f, y_hat, k) {
                Ok(r) => r,
                Err(Error::Degenerate) => continue,
                Err(e) => return Err(e),
            };
            let (att, rep) = (report.attracting(), report.repelling());
            if att.is_empty() {
                continue;
            }
            let orbit = base_orbit(f, y_hat, k);
            for q in rep {
                let v = CircleArc::new(q.x_star.shift(eps / 4.0), 1.0 - eps / 2.0)?;
                let mut a = v.start().value();
                let mut b = a + v.length();
                for m in 1..=n_max / k {
                    a = compose_lift(f, &orbit, a);
                    b = compose_lift(f, &orbit, b);
                    let len = b - a;
                    if len < eps {
                        let mid = CirclePoint::new(a + 0.5 * len);
                        let attractor = att
                            .iter()
                            .map(|p| p.x_star)
                            .min_by(|p, r| {
                                crate::circle::circle_dist(*p, mid).total_cmp(&crate::circle::circle_dist(*r, mid))
                            })
                            .unwrap();
                        return Ok(ContractiveOutcome::Certificate(ContractiveCertificate {
                            eps,
                            y_hat,
                            k,
                            v,
                            n: m * k,
                            image_length: len,
                            attractor,
                            repeller: q.x_star,
                        }));
                    }
                    let shift = a.floor();
                    a -= shift;
                    b -= shift;
                }
            }
        }
    }
    Ok(ContractiveOutcome::NotFound {
        k_max,
        message: format!("no certificate found at k <= {k_max}"),
    })
}
