//! Command-line front end: JSON run configurations, CSV output and the
//! `spectrum`, `fluxes`, `simulate` and `verify` subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

pub use commands::{fluxes_cmd, simulate_cmd, spectrum_cmd, verify_cmd, Overrides};
pub use config::RunConfig;
pub use error::{exit, CliError};
