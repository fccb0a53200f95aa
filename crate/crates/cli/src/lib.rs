//! Command-line front end for `hetci`: CSV ingestion, result serialization
//! and run manifests.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod output;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
