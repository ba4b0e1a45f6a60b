//! Pipeline behind the `indexscope` binary: config, commands, synthetic demo
//! panel and run manifests.

pub mod commands;
pub mod config;
pub mod demo;
pub mod error;
pub mod manifest;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use manifest::RunManifest;
