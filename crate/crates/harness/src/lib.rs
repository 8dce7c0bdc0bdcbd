//! Batch harness for the `sparsedom` models: a TOML test matrix is expanded
//! into inequality instances whose two sides are evaluated on the grid and
//! reported as CSV/JSON rows.
//!
//! Row ids, one per inequality, are documented in the README together with
//! the configuration schema.

pub mod cli;
pub mod config;
pub mod generators;
pub mod golden;
pub mod rows;
pub mod suites;

pub use config::{Config, ConfigError};
pub use rows::Row;
pub use suites::{run, Ctx, Suite};
