//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    /// The requested inequality does not apply to the given dimension or
    /// operator (each bound carries its own restrictions).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A polynomial lower bound was requested below its validity threshold.
    #[error("k_star = {k_star} is below the validity threshold {threshold}")]
    BelowThreshold { k_star: f64, threshold: f64 },

    /// No trapezoid profile with the given caps can match the prescribed moment.
    #[error("infeasible moment: {0}")]
    InfeasibleMoment(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// Verification was requested for an operator without a desk-scale
    /// spectrum oracle.
    #[error("no desk-scale oracle: {0}")]
    NoOracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
