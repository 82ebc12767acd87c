//! Forward model and inverse analysis for a flux-tunable, transmon-like SQUID
//! built from junctions with mixed 4π/2π current-phase relations and read out
//! through a dispersively coupled microwave cavity.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration,
//! plotting and the command line live in the `squidkit` crate.
//!
//! Unit conventions used throughout:
//!
//! - energies are carried as frequencies (`E/h`, Hz);
//! - coupling strengths and decay rates are `/2π` values in Hz;
//! - capacitances in F, currents in A, flux in Wb, bias in V.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod analysis;
pub mod cavity;
pub mod circuit;
pub mod constants;
mod error;
pub mod squid;
pub mod sweep;

pub use error::{Error, Result};
