use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("iteration limit {0} exceeded")]
    MaxIterations(usize),

    #[error("quadrature did not converge: error estimate {err:e} above tolerance {tol:e}")]
    QuadratureNonConvergence { err: f64, tol: f64 },

    #[error("bracket failure: {0}")]
    BracketFailure(String),

    #[error("moment does not exist: {0}")]
    MomentNonexistence(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("price outside no-arbitrage bounds: {0}")]
    PriceOutOfBounds(String),

    #[error("unattainable delta target: {0}")]
    UnattainableTarget(String),

    #[error("invalid option chain: {0}")]
    Chain(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("json error: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
