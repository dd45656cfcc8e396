//! Command-line front end: configuration files, experiment drivers and
//! CSV/SVG artifacts.

pub mod commands;
pub mod config;
pub mod kernels;
pub mod output;
pub mod svg;

use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, field '{field}': {message}")]
    Parse { line: usize, field: String, message: String },

    /// An invalid parameter or a violated modelling assumption.
    #[error("invalid parameters: {0}")]
    Invalid(frns_core::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<frns_core::Error> for CliError {
    fn from(e: frns_core::Error) -> Self {
        use frns_core::Error as E;
        match e {
            E::Assumption { .. } | E::Domain { .. } | E::InvalidGrid(_) | E::GridMismatch(_) => CliError::Invalid(e),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 1 numerical failure, 2 invalid parameters, 3 parse error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 3,
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}
