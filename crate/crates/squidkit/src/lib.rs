//! Configuration, file formats, plots and command line for `squidkit-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod plot;
pub mod record;

pub use error::{Error, Result};
