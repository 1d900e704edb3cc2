//! The skew product `F(y, x) = (g(y), f_y(x))` and the pullback
//! constructions built on it.

use serde::{Deserialize, Serialize};

use crate::base::ExpandingBase;
use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use crate::fiber::FiberFamily;
use crate::measure::EmpiricalCircleMeasure;
use crate::solenoid::SolenoidSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct SkewSystem {
    base: ExpandingBase,
    fiber: FiberFamily,
}

#[derive(Deserialize)]
struct RawSystem {
    base: ExpandingBase,
    fiber: FiberFamily,
}

impl TryFrom<RawSystem> for SkewSystem {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        SkewSystem::new(raw.base, raw.fiber)
    }
}

impl SkewSystem {
    pub fn new(base: ExpandingBase, fiber: FiberFamily) -> Result<Self> {
        if let FiberFamily::StepIfs(s) = &fiber {
            if base != (ExpandingBase::Linear { d: s.degree() }) {
                return Err(Error::Precondition(format!(
                    "step fiber maps of degree {} need a linear base of the same degree",
                    s.degree()
                )));
            }
        }
        Ok(SkewSystem { base, fiber })
    }

    pub fn base(&self) -> &ExpandingBase {
        &self.base
    }

    pub fn fiber(&self) -> &FiberFamily {
        &self.fiber
    }

    pub fn step(&self, y: CirclePoint, x: CirclePoint) -> (CirclePoint, CirclePoint) {
        (self.base.apply(y), self.fiber.eval(y, x))
    }

    /// Base orbit `y, g(y), ..., g^n(y)` and the images `f^n_y(x)` of every
    /// `x` in `xs`.
    pub fn fiber_compose(&self, y: CirclePoint, xs: &[CirclePoint], n: usize) -> (Vec<CirclePoint>, Vec<CirclePoint>) {
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(y);
        let mut xs = xs.to_vec();
        let mut y = y;
        for _ in 0..n {
            for x in xs.iter_mut() {
                *x = self.fiber.eval(y, *x);
            }
            y = self.base.apply(y);
            orbit.push(y);
        }
        (orbit, xs)
    }

    /// `F^{-1}(y, x) = ((..., y_{-2}, y_{-1}), f_{y_{-1}}^{-1}(x))`.
    pub fn inverse_step(&self, s: &SolenoidSample, x: CirclePoint) -> Result<(SolenoidSample, CirclePoint)> {
        let prev = s.retreat()?;
        let x = self.fiber.invert(prev.y0(), x)?;
        Ok((prev, x))
    }

    /// Pushes `init`, placed in the fiber over `y_{-n}`, forward along the
    /// stored backward orbit to the fiber over `y0`.
    pub fn pullback_push(&self, s: &SolenoidSample, init: &EmpiricalCircleMeasure, n: usize) -> Result<EmpiricalCircleMeasure> {
        if n > s.depth() {
            return Err(Error::Precondition(format!(
                "pullback length {n} exceeds solenoid depth {}",
                s.depth()
            )));
        }
        let ys: Vec<CirclePoint> = (1..=n).rev().map(|i| s.coord(i)).collect();
        Ok(init.pushforward(|x| ys.iter().fold(x, |x, &y| self.fiber.eval(y, x))))
    }

    /// Seeds `init` in the fiber over `g^n(y0)` and applies fiber inverses
    /// back down to the fiber over `y0`.
    pub fn forward_inverse_pullback(&self, y0: CirclePoint, n: usize, init: &EmpiricalCircleMeasure) -> Result<EmpiricalCircleMeasure> {
        let mut ys = Vec::with_capacity(n);
        let mut y = y0;
        for _ in 0..n {
            ys.push(y);
            y = self.base.apply(y);
        }
        init.try_pushforward(|x| {
            ys.iter()
                .rev()
                .try_fold(x, |x, &y| self.fiber.invert(y, x))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{circle_dist, minimal_covering_arc};
    use crate::solenoid::BranchWord;
    use proptest::prelude::*;

    fn p(x: f64) -> CirclePoint {
        CirclePoint::new(x)
    }

    fn flagship() -> SkewSystem {
        SkewSystem::new(ExpandingBase::linear(3).unwrap(), FiberFamily::sine_coupled(0.125).unwrap()).unwrap()
    }

    fn shear() -> SkewSystem {
        SkewSystem::new(ExpandingBase::linear(3).unwrap(), FiberFamily::LinearShear { j: 2 }).unwrap()
    }

    fn rotation() -> SkewSystem {
        SkewSystem::new(ExpandingBase::linear(3).unwrap(), FiberFamily::RigidRotation).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(flagship().step(p(0.0), p(0.0)), (p(0.0), p(0.0)));
        let (y, x) = flagship().step(p(0.25), p(0.0));
        assert!((y.value() - 0.75).abs() < 1e-15 && (x.value() - 0.25).abs() < 1e-15);
        let (y, x) = shear().step(p(0.1), p(0.2));
        assert!((y.value() - 0.3).abs() < 1e-15 && (x.value() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn fiber_compose_matches_steps() {
        let f = flagship();
        let xs = [p(0.1), p(0.7)];
        let (orbit, out) = f.fiber_compose(p(0.37), &xs, 0);
        assert_eq!(orbit, vec![p(0.37)]);
        assert_eq!(out, xs.to_vec());

        let (_, one) = f.fiber_compose(p(0.37), &xs, 1);
        for (a, x) in one.iter().zip(xs) {
            assert_eq!(*a, f.step(p(0.37), x).1);
        }

        let (orbit, five) = f.fiber_compose(p(0.37), &[p(0.1)], 5);
        let (mut y, mut x) = (p(0.37), p(0.1));
        for _ in 0..5 {
            (y, x) = f.step(y, x);
        }
        assert!(circle_dist(five[0], x) < 1e-12);
        assert!(circle_dist(orbit[5], y) < 1e-12);
    }

    #[test]
    fn inverse_step_examples() {
        let g = ExpandingBase::linear(3).unwrap();
        // y_{-1} = 0.1 is branch 0 over y0 = 0.3
        let s = SolenoidSample::backward_orbit(&g, p(0.3), BranchWord::new(vec![0])).unwrap();
        let (prev, x) = shear().inverse_step(&s, p(0.4)).unwrap();
        assert!((x.value() - 0.2).abs() < 1e-15);
        assert_eq!(prev.depth(), 0);
        assert!((prev.y0().value() - 0.1).abs() < 1e-15);

        let s = SolenoidSample::backward_orbit(&g, p(0.9), BranchWord::new(vec![0])).unwrap();
        let (_, x) = rotation().inverse_step(&s, p(0.5)).unwrap();
        assert!((x.value() - 0.2).abs() < 1e-15);

        assert_eq!(rotation().inverse_step(&prev, p(0.5)).unwrap_err(), Error::HistoryExhausted);
    }

    #[test]
    fn pullback_examples() {
        let g = ExpandingBase::linear(3).unwrap();
        let s = SolenoidSample::sample_indexed(&g, 40, 0, 11, 0).unwrap();
        let cloud = EmpiricalCircleMeasure::uniform(1000).unwrap();
        assert_eq!(flagship().pullback_push(&s, &cloud, 0).unwrap(), cloud);
        assert!(flagship().pullback_push(&s, &cloud, 41).is_err());

        let rot = rotation().pullback_push(&s, &cloud, 40).unwrap();
        let len = minimal_covering_arc(rot.points(), 0.9).unwrap().length();
        assert!((len - 0.9).abs() <= 2e-3, "{len}");
        assert_eq!(rot.weights(), cloud.weights());
        assert_eq!(rot.len(), cloud.len());
    }

    #[test]
    fn forward_inverse_pullback_examples() {
        let cloud = EmpiricalCircleMeasure::uniform(500).unwrap();
        assert_eq!(flagship().forward_inverse_pullback(p(0.2), 0, &cloud).unwrap(), cloud);
        let rot = rotation().forward_inverse_pullback(p(0.2), 30, &cloud).unwrap();
        let len = minimal_covering_arc(rot.points(), 0.9).unwrap().length();
        assert!((len - 0.9).abs() <= 3e-3, "{len}");
    }

    #[test]
    fn step_fiber_requires_matching_base() {
        use crate::stepifs::{StepIfs, StepIfsParams};
        let ifs = FiberFamily::StepIfs(StepIfs::build(StepIfsParams::default(), 4).unwrap());
        assert!(SkewSystem::new(ExpandingBase::linear(3).unwrap(), ifs.clone()).is_err());
        assert!(SkewSystem::new(ExpandingBase::linear(4).unwrap(), ifs).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn inverse_step_undoes_step(y in 0.0f64..1.0, x in 0.0f64..1.0, k in 0u32..3) {
            let f = flagship();
            let g = f.base();
            let y1 = g.apply(p(y));
            let pre = g.preimage(y1, k).unwrap();
            let s = SolenoidSample::backward_orbit(g, y1, BranchWord::new(vec![k])).unwrap();
            let x1 = f.fiber().eval(pre, p(x));
            let (prev, back) = f.inverse_step(&s, x1).unwrap();
            prop_assert!(circle_dist(back, p(x)) < 1e-10);
            prop_assert!(circle_dist(prev.y0(), pre) < 1e-12);
        }

        #[test]
        fn pullback_preserves_mass_and_count(seed in 0u64..1000, n in 0usize..20) {
            let f = flagship();
            let s = SolenoidSample::sample_indexed(f.base(), 20, 0, seed, 0).unwrap();
            let init = EmpiricalCircleMeasure::uniform(64).unwrap();
            let out = f.pullback_push(&s, &init, n).unwrap();
            prop_assert_eq!(out.len(), init.len());
            prop_assert_eq!(out.weights(), init.weights());
        }
    }
}
