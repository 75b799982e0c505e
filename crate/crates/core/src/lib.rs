//! Fractional-integration forecasting for strongly persistent series.
//!
//! Truncated fractional filters, Whittle-family memory estimators, mean
//! estimators for long-memory series, the FI forecasting pipeline with its
//! short-memory competitors, and seeded Monte Carlo and pseudo-out-of-sample
//! evaluation harnesses.

pub mod error;
pub mod fipipe;
pub mod fracdiff;
pub mod harness;
pub mod mc;
pub mod meanest;
pub mod memest;
pub mod models;
pub mod optim;
pub mod spectral;

pub use error::{Error, Result};
