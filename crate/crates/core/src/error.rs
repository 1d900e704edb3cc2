use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("resample required: sample counts {0} and {1} differ or weights are not uniform")]
    ResampleRequired(usize, usize),

    #[error("not a diffeomorphism: {0}")]
    NotDiffeomorphism(String),

    #[error("invalid branch: digit {digit} for a degree {degree} base")]
    InvalidBranch { digit: u32, degree: u32 },

    #[error("backward history exhausted")]
    HistoryExhausted,

    #[error("no concentration: resultant length {0:.3e}")]
    NoConcentration(f64),

    #[error("degenerate: non-hyperbolic family (displacement vanishes on the scan grid)")]
    Degenerate,

    #[error("parameters infeasible: {0}")]
    Infeasible(String),

    #[error("unknown system '{name}'; catalog: {catalog}")]
    UnknownSystem { name: String, catalog: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}
