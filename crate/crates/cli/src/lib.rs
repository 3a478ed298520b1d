//! Config parsing, presets, runs and result files for the `collapse` binary.

pub mod config;
pub mod oracle;
pub mod output;
pub mod presets;
pub mod runner;
