//! Command-line front end: configuration, field files, reports.

pub mod commands;
pub mod config;
pub mod fieldfile;
pub mod report;
pub mod scenario;
pub mod verify;

pub use commands::{run, Cli, CliError};
