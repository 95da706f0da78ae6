use thiserror::Error;

/// Crate-wide error type. Numerical guards (vacuum, stability, bracket
/// exhaustion) carry enough context to diagnose a failed run from the log.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("resolution error: dx = {dx:.6e} too coarse for wave width {width:.6e}")]
    Resolution { dx: f64, width: f64 },

    #[error("tail error: profile deviation {deviation:.3e} at domain edge exceeds {tol:.1e} after {extensions} extensions")]
    Tail {
        deviation: f64,
        tol: f64,
        extensions: usize,
    },

    #[error("stability bound violated: dt = {dt:.6e} > {max_dt:.6e}")]
    Stability { dt: f64, max_dt: f64 },

    #[error("vacuum breach at t = {t:.6e}: min n = {min_n:.6e} at xi = {xi:.6e}")]
    VacuumBreach { t: f64, min_n: f64, xi: f64 },

    #[error("shift bracket exhausted after {widenings} widenings: minimizer pinned at {edge:.6e}")]
    BracketExhausted { widenings: usize, edge: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
