//! Library surface of the command-line harness, exposed so integration and
//! acceptance tests can drive the commands in-process.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{Cli, Command, SchemeArg};
pub use run::SweepSpec;
