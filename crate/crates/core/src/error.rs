//! Unified error type for parameter validation and numerical routines.

use thiserror::Error;

/// Errors produced by constructors, domain checks, and numerical methods.
#[derive(Debug, Error)]
pub enum AcStarkError {
    /// A constructor received a value that violates a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its refinement budget before reaching
    /// the requested tolerance; the achieved error estimate is reported.
    #[error(
        "quadrature failed to converge: achieved relative error {achieved:.3e} \
         exceeds requested {requested:.3e} after {panels} panels"
    )]
    QuadratureNoConvergence {
        achieved: f64,
        requested: f64,
        panels: usize,
    },

    /// The ODE integrator could not complete a step within its limits.
    #[error("ODE integration failed: {0}")]
    OdeFailure(String),

    /// An internal cross-check (e.g. an imaginary residue that should vanish)
    /// exceeded its tolerance, indicating a numerical inconsistency.
    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    /// A rate fit was rejected because the data do not support it.
    #[error("rate fit rejected: {0}")]
    FitRejected(String),

    /// A member method of a multi-method validation run failed; the failing
    /// method is identified so the report stays attributable.
    #[error("oracle method '{method}' failed: {source}")]
    OracleMethod {
        method: String,
        #[source]
        source: Box<AcStarkError>,
    },
}

pub type Result<T> = std::result::Result<T, AcStarkError>;
