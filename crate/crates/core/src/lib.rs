//! Transient circuit simulation and characterization of a 16-transistor
//! symmetric phase frequency detector (PFD).
//!
//! The crate is layered bottom-up:
//!
//! - [`devices`]: Level-1 MOSFET model and process corners
//! - [`netlist`]: circuit graph, text format and the reference PFD builder
//! - [`engine`]: MNA, Newton-Raphson DC and fixed-step transient analysis
//! - [`measure`]: edge timing, pulse detection, decisions, power
//! - [`experiments`]: offset, dead-zone, f_max, sweep and corner studies
//! - [`report`]: JSON and plain-text summaries

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod devices;
pub mod engine;
mod error;
pub mod experiments;
pub mod measure;
pub mod netlist;
pub mod report;
pub mod waveform;

pub use error::{Error, Result};
