use std::path::Path;

use thiserror::Error;

/// Exit codes: 1 usage, 2 I/O, 3 schema, 4 missing weights, 5 data.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] playtest_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use playtest_core::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                E::Config(_) => "usage",
                E::Io(_) => "io",
                E::Csv(c) if c.is_io_error() => "io",
                E::Schema { .. } | E::Csv(_) => "schema",
                E::MissingWeights(_) => "missing-weights",
                _ => "data",
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "usage" => 1,
            "io" => 2,
            "schema" => 3,
            "missing-weights" => 4,
            _ => 5,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
