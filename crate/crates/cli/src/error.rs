use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input files; exit code 2.
    #[error("{0}")]
    Invalid(String),
    /// A computation failed or a replay did not reproduce; exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn invalid(context: &str, e: impl std::fmt::Display) -> Self {
        CliError::Invalid(format!("{context}: {e}"))
    }
}

impl From<hombell::Error> for CliError {
    fn from(e: hombell::Error) -> Self {
        use hombell::Error as E;
        match e {
            E::InvalidIntervals(_)
            | E::InvalidEfficiency(_)
            | E::Parse { .. }
            | E::InvalidParameter(_)
            | E::DimensionMismatch { .. }
            | E::NotOrthonormal { .. }
            | E::Io(_)
            | E::Json(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
