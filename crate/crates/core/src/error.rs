use thiserror::Error;

/// Errors raised by model construction, closed forms, quadrature and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters violate a Bochner permissibility condition.
    #[error("non-permissible parameters: {0}")]
    Permissibility(String),

    /// The requested spatial dimension is not supported by this formula.
    #[error("unsupported dimension d={d}: {reason}")]
    Dimension { d: u32, reason: &'static str },

    /// Finite/infinite spectral cutoff not supported by this formula.
    #[error("unsupported spectral cutoff: {0}")]
    Cutoff(&'static str),

    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gamma function evaluated at a pole.
    #[error("gamma function pole at x={0}")]
    Pole(f64),

    /// Quadrature failed to reach tolerance.
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// A spectral integral diverges.
    #[error("spectral integral diverges: {0}")]
    Divergence(String),

    /// A documented precondition was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Grid size not supported.
    #[error("invalid grid size: {0}")]
    Size(String),

    /// Empty input collection.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// I/O or encoding failure.
    #[error("i/o error: {0}")]
    Io(String),

    /// Malformed file or document.
    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
