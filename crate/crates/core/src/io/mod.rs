//! Configuration files, field snapshots, reports and the command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod snapshot;
