use thiserror::Error;

/// Errors surfaced by the library.
///
/// Dimension mismatches inside the simulation pipeline are treated as
/// defects and panic; these variants cover user-facing configuration,
/// usage, numerical-input, search, and I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (malformed polynomials, empty sweep, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Valid configuration used incorrectly (length mismatches, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Non-finite value where a finite one is required.
    #[error("numerical-input error: {0}")]
    NumericalInput(String),

    /// A bracketing search failed; carries the evidence gathered.
    #[error("search failure: {0}")]
    SearchFailure(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
