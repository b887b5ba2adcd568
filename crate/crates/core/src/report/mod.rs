//! Configuration, orchestration and file output behind the command line.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

pub use commands::{cmd_lambda, cmd_oracle, cmd_plot, cmd_verify, verify, VerificationReport};
pub use config::{Format, RunConfig};
