use std::path::PathBuf;

use surco_core::Error as CoreError;

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config file {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file: {message}")]
    Data { path: PathBuf, message: String },
    #[error("no trained model at {0}; run `surco train-prior` first or set \"model\" in the config")]
    MissingModel(PathBuf),
    #[error("no {what} instances under {dir}; run `surco generate` first")]
    MissingInstances { what: String, dir: PathBuf },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// Process exit status: 2 config, 3 infeasibility or guard, 4 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigParse { .. } => 2,
            CliError::Core(CoreError::Parameter(_)) => 2,
            CliError::Core(CoreError::Infeasible(_))
            | CliError::Core(CoreError::Guard(_))
            | CliError::Core(CoreError::DegenerateVariance) => 3,
            CliError::Core(CoreError::Json(_)) => 4,
            CliError::Io { .. }
            | CliError::Data { .. }
            | CliError::MissingModel(_)
            | CliError::MissingInstances { .. }
            | CliError::Csv(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
