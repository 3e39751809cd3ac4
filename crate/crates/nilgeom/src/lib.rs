//! Command-line front end and file formats for `nilgeom-core`.

pub mod cli;
pub mod config;
pub mod records;
