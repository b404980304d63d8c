//! File formats, configuration and subcommands of the `jscatter` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;

pub use commands::{cmd_diagnose, cmd_forward, cmd_gallery, cmd_inverse, cmd_roundtrip, GallerySpec, Outcome};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
