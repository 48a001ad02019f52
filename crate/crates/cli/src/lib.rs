//! Data ingestion, experiment configuration and runners for the `pmallows` command.

pub mod config;
pub mod experiments;
pub mod io;
pub mod table;
