//! Simulation core for entanglement concentration of less-entangled GHZ-class
//! atom states using photonic Faraday rotation in low-Q cavities.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It provides:
//!
//! - [`state`]: a sparse pure state over one photon polarization site and a
//!   register of atoms restricted to their two ground sublevels;
//! - [`cavity`]: the closed-form cavity reflection coefficients;
//! - [`gates`]: the optical and atomic operations used by the protocol;
//! - [`ecp`]: one concentration round, recycling and the multi-round driver;
//! - [`analytics`]: closed-form per-round and total success probabilities;
//! - [`montecarlo`]: seeded trajectory sampling of the full protocol.
#![no_std]

extern crate alloc;

pub mod analytics;
pub mod cavity;
pub mod ecp;
pub mod error;
pub mod gates;
pub mod montecarlo;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
