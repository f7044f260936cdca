use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot parse model spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    /// The argument lies outside the region where the function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Laplace exponent is `-inf` at this point: `E exp(lambda xi_1)` diverges.
    #[error("Laplace exponent is -infinity at lambda = {lambda}")]
    PhiInfinite { lambda: f64 },

    #[error("no positive root of the Laplace exponent: {0}")]
    NoRoot(String),

    #[error("Esscher tilt leaves the model family for {0}")]
    UnsupportedTilt(String),

    #[error("no closed-form law for {0}")]
    NoClosedForm(String),

    #[error("replicate {replicate} did not terminate after {blocks} blocks")]
    NonTermination { replicate: u64, blocks: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("insufficient tail data: {0}")]
    InsufficientTail(String),

    #[error("ladder epoch exceeded max steps in {timeouts} of {n} replicates")]
    LadderTimeout { timeouts: usize, n: usize },

    #[error("batch format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
