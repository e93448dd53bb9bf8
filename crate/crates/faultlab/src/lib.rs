//! File formats, checkpoints, run configuration and the `faultlab` command-line tool.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod csv_io;
pub mod files;

pub use config::RunConfig;
