use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A level, policy, optimizer or agent configuration is out of bounds.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Not enough observations to fit the requested model.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// One input has zero rank variance.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// A persisted file does not match its schema.
    #[error("schema violation in {path}: {message}")]
    Schema { path: String, message: String },

    /// Trained policy weights are required but absent.
    #[error("missing trained weights for level {0}")]
    MissingWeights(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: msg.into(),
        }
    }

    /// Wraps the message with extra context, keeping the variant.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
            Error::Contract(m) => Error::Contract(format!("{ctx}: {m}")),
            Error::InsufficientData(m) => Error::InsufficientData(format!("{ctx}: {m}")),
            Error::UndefinedCorrelation(m) => Error::UndefinedCorrelation(format!("{ctx}: {m}")),
            other => other,
        }
    }
}
