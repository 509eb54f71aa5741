//! Batch driver for the Landau relaxation laboratory: run configuration,
//! subcommands and the acceptance suite.

pub mod commands;
pub mod config;
pub mod setup;
pub mod suite;
