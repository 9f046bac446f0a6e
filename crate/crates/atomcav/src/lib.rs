//! Command-line driver, data output and invariant verification for
//! [`atomcav_core`].
//!
//! The `atomcav` binary has two subcommands:
//!
//!  - `simulate` runs a named or custom coupling schedule and writes one row
//!    per sample time as CSV or JSON.
//!  - `verify` runs the seeded invariant suites and reports the worst
//!    violation of each.

pub mod cli;
pub mod config;
pub mod output;
pub mod verify;

pub use atomcav_core as core;
