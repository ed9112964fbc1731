//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A cell in an input file could not be parsed.
    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },

    /// An invalid configuration value or combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Mismatched lengths or shapes between related inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A parameter outside its admissible range for the given data.
    #[error("out of range: {0}")]
    Range(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A mathematically ill-posed request (e.g. covariance with N <= V).
    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    /// A numerical routine failed to produce a finite answer.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
