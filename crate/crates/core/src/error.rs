//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field shape mismatch: expected {expected} values on the grid, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error(
        "sigma overflow guard: sigma*k_max = {product:.3} exceeds 700; \
         largest admissible sigma on this grid is {sigma_max:.6e}"
    )]
    SigmaOverflow { product: f64, sigma_max: f64 },

    #[error("modulation weight overflow: log-magnitude {log_weight:.1} exceeds 700")]
    WeightOverflow { log_weight: f64 },

    #[error("insufficient band: {usable} usable modes (need at least {needed})")]
    InsufficientBand { usable: usize, needed: usize },

    #[error("insufficient signal: {usable} sweep rows above the measurement floor (need at least 2)")]
    InsufficientSignal { usable: usize },

    #[error("non-finite value detected: {0}")]
    NonFinite(String),

    #[error("solver abort at t = {t:.6}: {reason}")]
    SolverAbort { t: f64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "short-time regime: horizon T = {t:.6} is below the local step delta = {delta:.6}; \
         the single-interval local result applies and no multi-step schedule is needed"
    )]
    ShortTimeRegime { t: f64, delta: f64 },

    #[error("degenerate probe: all four factor norms vanish while the product norm is {lhs:.3e}")]
    DegenerateProbe { lhs: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
