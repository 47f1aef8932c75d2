//! Crate-wide error type.

use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid construction parameters or mismatched grids.
    #[error("grid: {0}")]
    Grid(String),

    /// Invalid field data (wrong length, non-finite entries).
    #[error("field: {0}")]
    Field(String),

    /// Constitutive-model misuse (bad potential order, degenerate-mobility
    /// evaluation where the regularized model is required, entropy of a
    /// non-positive argument).
    #[error("physics: {0}")]
    Physics(String),

    /// Configuration key failed validation; `key` names the offending entry.
    #[error("config: {key}: {message}")]
    Config { key: String, message: String },

    /// Solver setup or stepping failure.
    #[error("solver: {0}")]
    Solver(String),

    /// Time step underflowed `dt_min` while the energy guard kept rejecting.
    /// Carries the last diagnostics sample for post-mortem inspection.
    #[error("solver: dt underflow at t = {t:.6e} (dt = {dt:.6e} < dt_min = {dt_min:.6e})")]
    DtUnderflow {
        t: f64,
        dt: f64,
        dt_min: f64,
        last_record: Box<DiagnosticsRecord>,
    },

    /// Checkpoint file malformed or inconsistent with expectations.
    #[error("checkpoint: {0}")]
    Checkpoint(String),

    /// Diagnostics operation on insufficient data.
    #[error("diagnostics: {0}")]
    Diagnostics(String),

    /// Sweep planning or execution failure. Member-run failures carry the
    /// per-theta summary rows completed before the abort.
    #[error("sweep: {0}")]
    Sweep(String),

    /// A sweep member run failed; partial summary is preserved.
    #[error("sweep: run for theta = {theta:.6e} failed: {source}")]
    SweepAborted {
        theta: f64,
        #[source]
        source: Box<Error>,
        completed: Vec<crate::sweep::SummaryRow>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
