use thiserror::Error;

/// Errors raised by the library. CLI-level failures live in [`crate::cli::CliError`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value is rational at working precision; expansion stopped after {quotients:?}")]
    RationalDetected { quotients: Vec<u64> },

    #[error("convergent index {k} exceeds computed depth {depth}")]
    DepthExceeded { k: usize, depth: usize },

    #[error("convergent recurrence overflowed 64-bit integers at index {k}")]
    ConvergentOverflow { k: usize },

    #[error("point {0} lies outside the placed gaps")]
    DomainRestricted(f64),

    #[error("inverse did not converge for y = {0}")]
    InverseNotConverged(f64),

    #[error("parameter tuning failed: {0}")]
    TuneFailed(String),

    #[error("rotation orbit ordering unresolvable between n = {0} and n = {1}")]
    OrderingUnresolvable(i64, i64),

    #[error("test function is nonzero at the gap boundary ({0})")]
    SupportLeak(f64),

    #[error("test function carries no variation bound")]
    NoVarBound,

    #[error("function mean {0:e} is not zero")]
    MeanNotZero(f64),

    #[error("small denominator at mode {0}")]
    SmallDenominator(i64),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
