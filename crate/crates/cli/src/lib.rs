//! Std companion to `faraday-ecp-core`: file formats, config files, the
//! transcript line format and a rayon-backed Monte Carlo estimator.

pub mod config;
pub mod formats;
pub mod parallel;
pub mod transcript;

mod error;

pub use error::{Error, Result};
