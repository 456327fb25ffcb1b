//! Command-line front end: run configurations, descriptor parsing and reports.

pub mod commands;
pub mod config;
pub mod parse;
pub mod report;

pub use commands::{run, transform, TransformDirection};
pub use config::{Identity, Mode, RunConfig};
pub use report::{report_compare, Report, Verdict};
