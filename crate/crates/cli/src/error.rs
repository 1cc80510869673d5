use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const GATE_FAILED: u8 = 1;
    pub const NONEXISTENCE: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const NO_INPUT: u8 = 66;
    pub const SOFTWARE: u8 = 70;
    pub const CANT_CREATE: u8 = 73;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("malformed record {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error(transparent)]
    Solver(ma_couple::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Read { source, .. } if source.kind() == io::ErrorKind::NotFound => {
                exit::NO_INPUT
            }
            CliError::Read { .. } => exit::NO_INPUT,
            CliError::Write { .. } => exit::CANT_CREATE,
            CliError::Malformed { .. } => exit::DATA,
            CliError::Solver(ma_couple::Error::InvalidSpec(_))
            | CliError::Solver(ma_couple::Error::GridTooCoarse { .. }) => exit::USAGE,
            CliError::Solver(ma_couple::Error::MaxIterExceeded { .. })
            | CliError::Solver(ma_couple::Error::ZeroCollapse { .. }) => exit::NOT_CONVERGED,
            CliError::Solver(_) => exit::SOFTWARE,
        }
    }
}

impl From<ma_couple::Error> for CliError {
    fn from(e: ma_couple::Error) -> Self {
        CliError::Solver(e)
    }
}
