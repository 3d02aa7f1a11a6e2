//! Command-line front end: system files, built-in demos, CSV tables and the
//! verification suite.

pub mod commands;
pub mod demo;
pub mod error;
pub mod system_file;
pub mod table;
pub mod verify;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
