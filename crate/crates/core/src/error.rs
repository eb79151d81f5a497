//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by lattice construction, propagation and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent sizes, out-of-range indices or malformed configuration.
    #[error("configuration: {0}")]
    Config(String),

    /// A physical parameter violates its contract (e.g. lossless auxiliary
    /// sites, negative hopping magnitude).
    #[error("validation: {0}")]
    Validation(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain: {0}")]
    Domain(String),

    /// A resource cap was exceeded (e.g. dense eigensolve size).
    #[error("resource limit: {0}")]
    Resource(String),

    /// NaN/overflow during integration or a failed numerical routine.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A data fit could not be performed (e.g. unresolvable packets).
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// A run ended before the measured process completed.
    #[error("incomplete run: {0}")]
    Incomplete(String),

    /// An ensemble member failed; carries the member seed for reproduction.
    #[error("ensemble member with seed {seed} failed: {source}")]
    Ensemble {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}
