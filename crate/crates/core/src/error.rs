use thiserror::Error;

/// Errors produced by configuration validation and the numeric pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: String,
    },

    /// The slotted-ALOHA baseline has no probing phase, so operations tied to
    /// the probing/reservation structure reject it.
    #[error("SA baseline has no probing-failure branch; use the baseline operations instead")]
    BaselineMechanism,

    /// Counterpart of the above: a baseline-only operation got a probing mechanism.
    #[error("operation only defined for the SA baseline, got {0}")]
    NotBaseline(&'static str),

    /// Stability condition fails: the chain has no stationary distribution.
    #[error("energy-sufficient regime: the buffer chain is not positive recurrent")]
    EnergySufficientRegime,

    /// The characteristic root left the open interval required by the closed form.
    #[error("characteristic root z = {z} outside (0,1); closed-form distribution undefined")]
    RootOutOfRange { z: f64 },

    /// Boundary cases (e.g. q = 1 or xi = 1) give P_ah = 0 or P_ad = 0 and the
    /// closed form degenerates.
    #[error("degenerate buffer chain: {0}")]
    DegenerateChain(&'static str),

    #[error("fixed-point iteration did not converge; last residual {residual:e}")]
    FixedPointDiverged { residual: f64 },

    #[error("power iteration did not converge; last delta {delta:e}")]
    PowerIterationDiverged { delta: f64 },

    /// No transmission attempts can ever occur (q = 0 and no fallback access).
    #[error("attempt probability is zero; AoI undefined")]
    NoAttempts,

    #[error("grid is empty or has out-of-range values: {0}")]
    InvalidGrid(&'static str),

    #[error("all grid points failed to evaluate")]
    AllGridPointsFailed,

    #[error("at least {needed} replications required, got {got}")]
    InsufficientReplications { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
