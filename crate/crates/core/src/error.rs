use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments violate an operation's precondition (shape, sign, range).
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// A numerical routine failed to produce a trustworthy answer.
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// The relay codeword Gram matrix is (numerically) singular.
    #[error("degenerate codeword: min/max Gram eigenvalue ratio {ratio:e}")]
    DegenerateCodeword { ratio: f64 },

    /// The relay-destination channel has no nonzero eigenmode.
    #[error("degenerate channel: all relay-destination eigenvalues are zero")]
    DegenerateChannel,

    /// The infinite-buffer queue has no steady state.
    #[error("unstable queue: arrival probability {a} >= departure probability {b}")]
    Unstable { a: f64, b: f64 },

    /// A configuration value is missing, malformed or out of range.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category used on the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Numerical { .. } => "numerical",
            Error::DegenerateCodeword { .. } => "degenerate_codeword",
            Error::DegenerateChannel => "degenerate_channel",
            Error::Unstable { .. } => "unstable",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
