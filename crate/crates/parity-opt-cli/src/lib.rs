//! Batch front door for the fair-classification library: CSV ingestion,
//! seeded synthetic generators, and the subcommand implementations behind the
//! `parity-opt` binary.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod joint;
pub mod report;
pub mod synth;

pub use error::{CliError, CliResult};
