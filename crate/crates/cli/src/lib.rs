//! Data ingestion, transforms, experiment configs, report writers and the
//! `longmem` command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod fetch;
pub mod series;
pub mod tables;
pub mod transform;

pub use error::{DataError, DataResult};
pub use series::{read_csv_series, SeriesFrame};
