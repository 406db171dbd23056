//! Command-line front end: runs, seed batches, log analysis and reports.

pub mod commands;
pub mod config;
