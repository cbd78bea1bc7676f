//! Command-line driver, file formats and parallel experiments on top of
//! `dslab-core`.
//!
//! The binary is a thin shell over [`run::execute`], which maps a
//! [`config::RunConfig`] to a [`run::Report`]. Reports embed their
//! normalized config, so `dslab --config report.csv` regenerates them.

pub mod config;
pub mod error;
pub mod format;
pub mod oracle;
pub mod par;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use run::{execute, Report};
