use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("invalid expression for {name}: {message}")]
    Expression { name: String, message: String },
    #[error(transparent)]
    Core(#[from] gausscurve::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A run that finished without meeting its goal; details were already reported.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for problems with the inputs, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use gausscurve::Error as E;
        match self {
            CliError::Config(_) | CliError::Expression { .. } => 2,
            CliError::Core(E::InvalidParameter(_) | E::DegenerateCloud(_) | E::Incompatible { .. }) => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
