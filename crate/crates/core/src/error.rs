//! Error type shared by every solver in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SolverError>;

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// Input matrices do not have the shapes the operation requires.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A receive gain that must be strictly positive was not.
    #[error("receive gain must be strictly positive, got {gamma}")]
    NonPositiveScale { gamma: f64 },

    /// The weighted receive filter carries (numerically) no energy, so the
    /// precoder subproblem has no meaningful noise-regularization term.
    #[error("degenerate receive filter: trace(W L L^H) = {trace:.3e} <= {threshold:.0e}")]
    DegenerateReceiver { trace: f64, threshold: f64 },

    /// The quadratic-form matrix `Y` of the precoder subproblem is too ill
    /// conditioned to factor reliably.
    #[error("Hermitian system matrix is numerically singular: condition number {cond:.3e} exceeds {limit:.0e}")]
    SingularY { cond: f64, limit: f64 },

    /// A dual candidate left the interval on which the shifted system stays
    /// positive definite.
    #[error("dual value {lambda_bar:.6e} is outside the feasible interval [0, {upper:.6e})")]
    InfeasibleDual { lambda_bar: f64, upper: f64 },

    /// The requested harvested energy exceeds what any feasible precoder
    /// can deliver.
    #[error("target energy {target:.6e} exceeds the attainable maximum {e_max:.6e}")]
    TargetUnattainable { target: f64, e_max: f64 },

    /// The dual root search exhausted its iteration budget.
    #[error(
        "bisection stalled: |J| = {residual:.3e} > {tolerance:.3e} after {iterations} iterations"
    )]
    BisectionFailure {
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },

    /// No strictly positive receive gain is stationary for the given pair
    /// (precoder, receive filter); the caller should re-randomize.
    #[error("no strictly positive receive gain is stationary for this transceiver pair")]
    NoPositiveScale,

    /// Every initialization of a multi-start solve failed.
    #[error("all {starts} initializations degenerated; no solution produced")]
    AllStartsDegenerate { starts: usize },

    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An iterative oracle finished without reaching its accuracy target.
    #[error("{what}: achieved {achieved:.3e}, required {required:.3e}")]
    ToleranceNotMet {
        what: &'static str,
        achieved: f64,
        required: f64,
    },
}

impl SolverError {
    /// Stable variant name for callers that report error classes (exit
    /// messages, logs). Unlike `Display`, this never carries values.
    pub fn name(&self) -> &'static str {
        match self {
            SolverError::DimensionMismatch { .. } => "DimensionMismatch",
            SolverError::NonPositiveScale { .. } => "NonPositiveScale",
            SolverError::DegenerateReceiver { .. } => "DegenerateReceiver",
            SolverError::SingularY { .. } => "SingularY",
            SolverError::InfeasibleDual { .. } => "InfeasibleDual",
            SolverError::TargetUnattainable { .. } => "TargetUnattainable",
            SolverError::BisectionFailure { .. } => "BisectionFailure",
            SolverError::NoPositiveScale => "NoPositiveScale",
            SolverError::AllStartsDegenerate { .. } => "AllStartsDegenerate",
            SolverError::InvalidConfig(_) => "InvalidConfig",
            SolverError::ToleranceNotMet { .. } => "ToleranceNotMet",
        }
    }
}
