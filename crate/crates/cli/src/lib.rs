//! Command-line front end for `pfs-core`: JSON documents for instances and
//! schedules, the `pfs` subcommands and SVG Gantt charts.

pub mod commands;
pub mod document;
pub mod error;
pub mod gantt;

pub use error::CliError;
