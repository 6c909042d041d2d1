//! Joint spectral amplitude of noncollinear type-I SPDC photon pairs pumped by
//! a pulse-front-tilted beam.
//!
//! The crate evaluates the full biphoton amplitude on a wavelength-detuning
//! grid, the closed-form Gaussian model of its bandwidths, and the Schmidt
//! decomposition that quantifies heralded-photon purity.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod biphoton;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod gaussmodel;
pub mod keyvalue;
pub mod phasematch;
pub mod report;

pub use error::{Error, Result};
