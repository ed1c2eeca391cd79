use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The attacker controls at least half the hash power, so no depth ever
    /// pushes the double-spend probability below the threshold.
    #[error("no finite confirmation depth: attacker share q = {q} is at least 0.5")]
    NoFiniteDepth { q: f64 },

    /// The depth search hit its cap or stalled at floating-point resolution.
    #[error("confirmation search exhausted at z = {depth} without reaching epsilon = {epsilon}")]
    DepthSearchExhausted { depth: u64, epsilon: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
