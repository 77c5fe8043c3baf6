//! Monte Carlo simulation of write operations in cross-point RRAM arrays.

pub mod array;
pub mod cli;
pub mod config;
pub mod device;
pub mod experiments;
pub mod error;
pub mod monte_carlo;
pub mod oracle;
pub mod rng;
pub mod selftest;
pub mod solver;

pub use error::{Error, Result};
