//! Command-line front-end for the `anisotrap` library: configuration
//! parsing, deterministic CSV/JSON output and the subcommand drivers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;
