//! Command-line driver for the Berry-phase sweeps.
//!
//! The binary is a thin layer over [`commands`]; everything here is usable
//! from tests without spawning a process.

pub mod commands;
pub mod config;
pub mod plot;
pub mod sweep;

pub use config::{Config, ConfigError, Kind, Mode};
