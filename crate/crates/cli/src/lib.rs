//! Config-driven runner for the `ionsqueeze` protocols.

pub mod config;
pub mod output;
pub mod report;
