use thiserror::Error;

/// Failure modes shared across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CscError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("primer vector vanished (|B^T lambda| = {0:e})")]
    DegenerateDirection(f64),

    #[error("thrust direction blend degenerated (norm {0:e})")]
    DegenerateBlend(f64),

    #[error("propagation failed at t = {t} TU: {reason}")]
    Propagation { t: f64, reason: String },

    #[error("no convergence: best residual {best_residual:e} ({detail})")]
    NoConvergence { best_residual: f64, detail: String },

    /// Carries the last converged smoothing parameter and its initial costates, if any.
    #[error("homotopy aborted below rho = {last_rho:e}: {detail}")]
    HomotopyAbort { last_rho: f64, eta0: Option<[f64; 7]>, detail: String },

    #[error("ephemeris: {0}")]
    Ephemeris(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, CscError>;
