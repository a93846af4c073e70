use maxheat_core::Error as CoreError;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn parse(path: &str, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.to_string(),
            message: message.into(),
        }
    }

    /// Process exit status: 2 configuration, 3 numerical failure,
    /// 4 solver non-convergence, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::Config { .. }
                | CoreError::BoundViolation { .. }
                | CoreError::Cfl { .. }
                | CoreError::OutsideDomain { .. }
                | CoreError::Parse { .. } => 2,
                CoreError::NonFinite { .. } => 3,
                CoreError::CgNonConvergence { .. } | CoreError::PicardNonConvergence { .. } => 4,
                CoreError::Io { .. } => 1,
            },
        }
    }
}
