//! File formats, dataset generation, training pipelines and the
//! `lambpolar` command line, on top of `lambpolar-core`.

pub use lambpolar_core as core;

pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod featurize;
pub mod io;
pub mod learn;
pub mod run;

pub use error::{AppError, Result};
