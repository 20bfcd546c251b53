//! Command implementations behind the `osfd` binary, split out as a library
//! so integration tests can drive them in-process.

pub mod bench;
pub mod config;
pub mod design_io;
pub mod error;
pub mod eval_fill;
pub mod run;
pub mod step;
pub mod subprocess;

pub use error::{CliError, CliResult};
