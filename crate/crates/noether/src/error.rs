//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by system evaluation, integration and constant building.
#[derive(Debug, Error)]
pub enum Error {
    /// A point (t, q, q̇) fell in a region excluded by the system's domain guard.
    #[error("domain guard violated at t = {t}{}", detail_suffix(.detail))]
    DomainViolation { t: f64, detail: String },

    /// The velocity Hessian ∂²L/∂q̇² is singular or too ill-conditioned to solve.
    #[error("singular mass matrix at t = {t} (condition estimate {cond:.3e})")]
    SingularMassMatrix { t: f64, cond: f64 },

    /// The adaptive step controller hit the minimum step size.
    #[error("integration step failure at t = {t}: {detail}")]
    StepFailure { t: f64, detail: String },

    /// A family or evaluator requested a sample outside the padded interval.
    #[error("sample at t = {t} outside padded interval [{lo}, {hi}]")]
    PadExceeded { t: f64, lo: f64, hi: f64 },

    /// Cumulative quadrature failed its self-consistency cross-check.
    #[error("quadrature refinement disagrees beyond tolerance: |ΔS| = {disagreement:.3e} > {threshold:.3e}")]
    QuadratureFailure { disagreement: f64, threshold: f64 },

    /// No Lagrangian shift keeps the denominator of the trivializing time change away from zero.
    #[error("trivialization denominator vanishes along the trajectory{}", detail_suffix(.detail))]
    ZeroDenominator { detail: String },

    /// A single-motion family failed its invariance residual precondition.
    #[error("invariance residual {residual:.3e} exceeds {threshold:.3e}; not a symmetry along this motion")]
    ResidualTooLarge { residual: f64, threshold: f64 },

    /// Catalog lookup with an id that is not registered.
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    /// Invalid run configuration (bad key, malformed value, unreadable file).
    #[error("configuration error: {0}")]
    Config(String),

    /// Generic ODE solve failure outside of trajectory integration.
    #[error("ODE solve failed: {0}")]
    OdeFailure(String),

    /// Report serialization or filesystem failure.
    #[error("report output error: {0}")]
    Report(String),
}

fn detail_suffix(detail: &str) -> String {
    if detail.is_empty() {
        String::new()
    } else {
        format!(": {detail}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
