//! Truncated points of the solenoid: a base point `y0` together with a
//! finite backward orbit `y_{-1}, ..., y_{-n}` selected by a branch word.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::base::ExpandingBase;
use crate::circle::{circle_dist, CirclePoint};
use crate::error::{Error, Result};

/// Default truncation depth for convergence experiments.
pub const DEFAULT_DEPTH_CAP: usize = 60;

/// RNG for Monte Carlo sample `index` under a run seed.
///
/// Every sample draws from its own ChaCha stream, so results do not depend
/// on how samples are distributed over workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Branch digits; digit `i` picks the preimage taken at backward step `i`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchWord(Vec<u32>);

impl BranchWord {
    pub fn new(digits: Vec<u32>) -> Self {
        BranchWord(digits)
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self, degree: u32) -> Result<()> {
        match self.0.iter().find(|&&k| k >= degree) {
            Some(&digit) => Err(Error::InvalidBranch { digit, degree }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidSample {
    y0: CirclePoint,
    word: BranchWord,
    /// `[y_{-1}, ..., y_{-n}]`
    backward: Vec<CirclePoint>,
    /// True when `y0` is exactly distributed by the invariant density.
    exact: bool,
}

/// Serialized form `{"y0": ..., "digits": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolenoidRecord {
    pub y0: f64,
    pub digits: Vec<u32>,
}

impl SolenoidSample {
    /// Follows `word` backwards from `y0`.
    pub fn backward_orbit(g: &ExpandingBase, y0: CirclePoint, word: BranchWord) -> Result<Self> {
        word.validate(g.degree())?;
        let mut backward = Vec::with_capacity(word.depth());
        let mut y = y0;
        for &k in word.digits() {
            y = g.preimage(y, k)?;
            backward.push(y);
        }
        Ok(SolenoidSample {
            y0,
            word,
            backward,
            exact: g.is_linear(),
        })
    }

    /// A `nu`-approximate sample: `y0 = g^burn_in(u)` for uniform `u`, then
    /// i.i.d. uniform digits. Exact for linear bases.
    pub fn sample<R: Rng + ?Sized>(g: &ExpandingBase, depth: usize, burn_in: usize, rng: &mut R) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Precondition("solenoid depth must be >= 1".into()));
        }
        let mut y0 = CirclePoint::new(rng.random::<f64>());
        for _ in 0..burn_in {
            y0 = g.apply_with_fresh_digits(y0, rng);
        }
        let d = g.degree();
        let word = BranchWord((0..depth).map(|_| rng.random_range(0..d)).collect());
        Self::backward_orbit(g, y0, word)
    }

    /// Sample `index` of a reproducible Monte Carlo run.
    pub fn sample_indexed(g: &ExpandingBase, depth: usize, burn_in: usize, seed: u64, index: u64) -> Result<Self> {
        Self::sample(g, depth, burn_in, &mut sample_rng(seed, index))
    }

    pub fn from_record(g: &ExpandingBase, rec: &SolenoidRecord) -> Result<Self> {
        Self::backward_orbit(g, CirclePoint::new(rec.y0), BranchWord(rec.digits.clone()))
    }

    pub fn to_record(&self) -> SolenoidRecord {
        SolenoidRecord {
            y0: self.y0.value(),
            digits: self.word.0.clone(),
        }
    }

    pub fn y0(&self) -> CirclePoint {
        self.y0
    }

    pub fn word(&self) -> &BranchWord {
        &self.word
    }

    pub fn depth(&self) -> usize {
        self.backward.len()
    }

    /// `[y_{-1}, ..., y_{-n}]`
    pub fn backward(&self) -> &[CirclePoint] {
        &self.backward
    }

    /// `y_{-i}` for `i` in `0..=depth`.
    pub fn coord(&self, i: usize) -> CirclePoint {
        if i == 0 {
            self.y0
        } else {
            self.backward[i - 1]
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// The shifted point `(..., y_{-1}, y0, g(y0))`; depth grows by one.
    pub fn advance(&self, g: &ExpandingBase) -> Self {
        let mut backward = Vec::with_capacity(self.backward.len() + 1);
        backward.push(self.y0);
        backward.extend_from_slice(&self.backward);
        let mut digits = Vec::with_capacity(backward.len());
        digits.push(g.branch_of(self.y0));
        digits.extend_from_slice(self.word.digits());
        SolenoidSample {
            y0: g.apply(self.y0),
            word: BranchWord(digits),
            backward,
            exact: self.exact,
        }
    }

    /// The most recent `depth` coordinates only.
    pub fn truncate(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth());
        SolenoidSample {
            y0: self.y0,
            word: BranchWord(self.word.0[..depth].to_vec()),
            backward: self.backward[..depth].to_vec(),
            exact: self.exact,
        }
    }

    /// Drops `y0`: the point `(..., y_{-2}, y_{-1})`, depth shrinks by one.
    pub fn retreat(&self) -> Result<Self> {
        if self.backward.is_empty() {
            return Err(Error::HistoryExhausted);
        }
        Ok(SolenoidSample {
            y0: self.backward[0],
            word: BranchWord(self.word.0[1..].to_vec()),
            backward: self.backward[1..].to_vec(),
            exact: self.exact,
        })
    }

    /// Largest violation of `g(y_{-i-1}) = y_{-i}` along the stored orbit.
    pub fn max_relation_error(&self, g: &ExpandingBase) -> f64 {
        (0..self.depth())
            .map(|i| circle_dist(g.apply(self.coord(i + 1)), self.coord(i)))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> CirclePoint {
        CirclePoint::new(x)
    }

    fn g3() -> ExpandingBase {
        ExpandingBase::linear(3).unwrap()
    }

    #[test]
    fn backward_orbit_examples() {
        let s = SolenoidSample::backward_orbit(&g3(), p(0.3), BranchWord::new(vec![0])).unwrap();
        assert!((s.backward()[0].value() - 0.1).abs() < 1e-15);

        let s = SolenoidSample::backward_orbit(&g3(), p(0.3), BranchWord::new(vec![1, 2])).unwrap();
        assert!((s.backward()[0].value() - 1.3 / 3.0).abs() < 1e-15);
        assert!((s.backward()[1].value() - (1.3 / 3.0 + 2.0) / 3.0).abs() < 1e-15);
        assert!((s.backward()[1].value() - 0.811111).abs() < 1e-6);

        let s = SolenoidSample::backward_orbit(&g3(), p(0.3), BranchWord::default()).unwrap();
        assert!(s.backward().is_empty());

        let err = SolenoidSample::backward_orbit(&g3(), p(0.3), BranchWord::new(vec![0, 3]));
        assert_eq!(err.unwrap_err(), Error::InvalidBranch { digit: 3, degree: 3 });
    }

    #[test]
    fn advance_examples() {
        let s = SolenoidSample::backward_orbit(&g3(), p(0.1), BranchWord::default()).unwrap();
        let a = s.advance(&g3());
        assert!((a.y0().value() - 0.3).abs() < 1e-15);
        assert_eq!(a.backward(), &[p(0.1)]);
        assert_eq!(a.word().digits(), &[0]);

        let s = SolenoidSample::backward_orbit(&g3(), p(0.3), BranchWord::new(vec![1, 2])).unwrap();
        let a = s.advance(&g3());
        assert_eq!(a.depth(), 3);
        assert_eq!(&a.backward()[1..], s.backward());
        assert_eq!(a.retreat().unwrap(), s);
        assert!(a.max_relation_error(&g3()) < 1e-12);

        let gp = ExpandingBase::perturbed(3, 0.02).unwrap();
        let s = SolenoidSample::sample_indexed(&gp, 25, 10, 3, 0).unwrap();
        let a = s.advance(&gp).advance(&gp);
        assert!(a.max_relation_error(&gp) < 1e-12);
        // the recorded digits rebuild the same orbit
        let rebuilt = SolenoidSample::from_record(&gp, &a.to_record()).unwrap();
        for i in 0..a.depth() {
            assert!(circle_dist(rebuilt.backward()[i], a.backward()[i]) < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = SolenoidSample::sample_indexed(&g3(), 40, 0, 99, 5).unwrap();
        let b = SolenoidSample::sample_indexed(&g3(), 40, 0, 99, 5).unwrap();
        let c = SolenoidSample::sample_indexed(&g3(), 40, 0, 99, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_exact());
        assert!(a.max_relation_error(&g3()) < 1e-12);
        assert!(SolenoidSample::sample_indexed(&g3(), 0, 0, 1, 1).is_err());
    }

    #[test]
    fn record_json_shape() {
        let s = SolenoidSample::backward_orbit(&g3(), p(0.25), BranchWord::new(vec![2, 0])).unwrap();
        let json = serde_json::to_string(&s.to_record()).unwrap();
        assert_eq!(json, r#"{"y0":0.25,"digits":[2,0]}"#);
    }
}
