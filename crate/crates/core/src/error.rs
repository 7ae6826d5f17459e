use thiserror::Error;

use crate::crs::PairId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A ranking system that is not concordant was passed where a CRS is required.
    #[error("ranking system is not concordant (cycle of length {})", .cycle.len())]
    NotConcordant { cycle: Vec<PairId> },

    #[error("K must exceed 2^d (K = {k}, d = {d})")]
    DimensionTooHigh { k: f64, d: u32 },

    #[error("invalid 2NRQ parameters: {0}")]
    Parameter(String),

    /// The radius recursion has no root in its bracket; this ends a schedule.
    #[error("radius schedule exhausted after r = {r_prev}")]
    ScheduleExhausted { r_prev: f64 },

    /// The request would need more resources than this lab is willing to spend.
    #[error("refused: {0}")]
    Refused(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
