use thiserror::Error;

use crate::lattice::Site;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("operation requires a planar region or edge")]
    NotPlanar,
    #[error("model {0} is not an orientation law")]
    NotAnOrientationLaw(&'static str),
    #[error("site {0} lies outside the region")]
    SiteOutsideRegion(Site),
    #[error("region has {edges} edges, exhaustive enumeration is capped at {cap}")]
    RegionTooLarge { edges: usize, cap: usize },
    #[error("start column {0} is outside the admissible dual window")]
    StartOutOfRange(i32),
    #[error("regions do not match: {0}")]
    RegionMismatch(String),
    #[error("slab coupling requires p in [1/2, 1], got {0}")]
    CouplingRange(f64),
    #[error("conditioning event has probability zero")]
    DegenerateConditioning,
    #[error("enumeration budget exceeded: {requested} > {cap}")]
    BudgetExceeded { requested: usize, cap: usize },
    #[error("estimate needs at least one sample")]
    NoSamples,
    #[error("successes {successes} exceed samples {samples}")]
    TooManySuccesses { successes: u64, samples: u64 },
    #[error("malformed sweep table: {0}")]
    MalformedTable(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidProbability(p))
    }
}
