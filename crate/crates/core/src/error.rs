use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadratic models have different curvature ({left} vs {right})")]
    CurvatureMismatch { left: f64, right: f64 },

    #[error("prox output left the domain of the nonsmooth term")]
    OutsideDomain,

    #[error("function undefined at a finite-difference probe (coordinate {coord})")]
    UndefinedProbe { coord: usize },

    #[error("line search exceeded {trials} trials (last estimate {last})")]
    LineSearchExhausted { trials: usize, last: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error(
        "power iteration did not converge after {iters} iterations (last estimate {estimate})"
    )]
    PowerIterationNoConvergence { iters: usize, estimate: f64 },

    #[error("degenerate operator: largest eigenvalue {0:e} is numerically zero")]
    DegenerateOperator(f64),

    #[error("empty input vector")]
    EmptyInput,

    #[error("config error: {0}")]
    Config(String),

    #[error("trace error: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}
