use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced to the command line, each with a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Singular(String),
    #[error("{0}")]
    MonteCarloInvalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Singular(_) => 3,
            CliError::MonteCarloInvalid(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    /// Short tag for the single-line error report.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Singular(_) => "singular",
            CliError::MonteCarloInvalid(_) => "monte-carlo-invalid",
            CliError::Io { .. } => "io",
        }
    }

    /// `kind: message` on one line.
    pub fn report(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("{}: {}", self.kind(), msg)
    }
}

impl From<homodyne_u2::Error> for CliError {
    fn from(e: homodyne_u2::Error) -> Self {
        use homodyne_u2::Error as E;
        match e {
            E::SingularFisher { .. }
            | E::SingularCoefficient { .. }
            | E::DegenerateCovariance { .. } => CliError::Singular(e.to_string()),
            E::NotUnitary { .. } | E::DimensionMismatch { .. } | E::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}
