use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument or parameter lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The result is not representable (division by a vanishing survival
    /// or distribution function, a probability outside [0, 1], ...).
    #[error("range error: {0}")]
    Range(String),

    #[error("moment of order {order} does not exist (requires order < phi*eta = {limit})")]
    MomentNotFinite { order: f64, limit: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("integral of the density power diverges for rho = {0}")]
    Divergent(f64),

    #[error("series expansion requires 0 < c < 2 (|1 - c| < 1), got c = {0}")]
    OutsideConvergenceRegion(f64),

    #[error("invalid order statistic rank {rank} for sample size {n}")]
    InvalidRank { rank: usize, n: usize },

    #[error("the quantile at u = 1 is unbounded")]
    UnboundedQuantile,

    #[error("data error: {0}")]
    Data(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("unknown dataset `{0}` (expected kevlar, cancer or device)")]
    UnknownDataset(String),

    #[error("unknown model `{0}` (expected aphbxii, hbxii, apbxii, mobxii or bxii)")]
    UnknownModel(String),

    #[error("unknown simulation parameter set {0} (expected 1 to 4)")]
    UnknownParameterSet(usize),

    #[error("all {0} optimizer starts failed")]
    AllStartsFailed(usize),

    #[error("inconsistent likelihood ratio: {0}")]
    Inconsistent(String),

    #[error("Monte Carlo cell n = {n}: {failed} of {total} fits failed")]
    TooManyFailures { n: usize, failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
