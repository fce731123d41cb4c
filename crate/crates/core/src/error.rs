use thiserror::Error;

/// Errors produced by the simulation and synthesis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integration failed at t = {t:e} s (step {step:e} s, {steps} steps taken): {reason}")]
    Integration {
        t: f64,
        step: f64,
        steps: usize,
        reason: String,
    },

    #[error("Fock truncation at {dim} levels is too small: tail population {tail:e} (increase the truncation)")]
    Truncation { dim: usize, tail: f64 },

    #[error("root finder did not converge after {iterations} iterations; best residual {residual:e} at {best:?}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("waveform: {0}")]
    Waveform(String),

    #[error("config: {0}")]
    Config(String),

    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code for this error class.
    ///
    /// Configuration problems map to 2, numerical failures to 3, I/O to 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } => 2,
            Error::Integration { .. }
            | Error::Truncation { .. }
            | Error::NonConvergence { .. }
            | Error::Waveform(_) => 3,
            Error::Io(_) => 4,
        }
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Integration { .. } => "integration",
            Error::Truncation { .. } => "truncation",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Waveform(_) => "waveform",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
