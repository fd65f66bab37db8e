//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or mathematical precondition was violated (bad frequency,
    /// negative length, overlapping bands, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Configuration or data-file problem: unknown keys, missing media,
    /// malformed numbers, schema-version mismatch.
    #[error("schema error: {0}")]
    Schema(String),

    /// Impedance requested too close to a parallel-branch pole.
    #[error("frequency {f_hz} Hz is within relative distance {rel:.3e} of branch pole {pole_hz} Hz")]
    PoleProximity { f_hz: f64, pole_hz: f64, rel: f64 },

    /// Resonant-network synthesis did not reach the residual target.
    #[error("network synthesis failed after {iterations} iterations: max residual {residual:.3e} (target {target:.3e})")]
    Synthesis {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    /// An iterative numeric routine exhausted its iteration budget.
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// The deterministic channel has zero coupling; log-domain quantities
    /// are undefined.
    #[error("degenerate link: combined coupling is zero")]
    DegenerateLink,

    /// Random sampling failed (e.g. truncated-Gaussian rejection bound hit).
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Filesystem problem while reading or writing an artifact.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code class for the CLI: 2 config/schema, 3 numeric
    /// non-convergence, 4 validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Io { .. } => 2,
            Error::Synthesis { .. } | Error::NonConvergence { .. } | Error::Sampling(_) => 3,
            Error::Validation(_)
            | Error::PoleProximity { .. }
            | Error::DegenerateLink => 4,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
