use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin system: {0}")]
    InvalidSystem(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid timing: {0}")]
    InvalidTiming(String),

    #[error("state basis does not match the sequence spin system")]
    BasisMismatch,

    #[error("pulse tagged `{0}` not found in sequence")]
    PulseNotFound(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("fit did not converge after {iterations} iterations (last relative step {last_step:e}, rss {rss:e})")]
    FitNonConvergence {
        iterations: usize,
        last_step: f64,
        rss: f64,
    },
}
