//! Library behind the `ma-couple` binary: argument definitions, run records,
//! CSV export and the subcommands.

pub mod args;
pub mod commands;
pub mod error;
pub mod export;
pub mod record;

pub use args::{Cli, Command};
pub use error::{exit, CliError};
pub use record::RunRecord;
