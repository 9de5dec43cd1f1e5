//! Learning Cartesian k-space sampling patterns for undersampled parallel
//! MRI by bias-accelerated subset selection (BASS).
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`], [`volume`], [`pattern`], [`dataset`]: domain types and the
//!   sampling operator.
//! - [`sampling`]: baseline pattern generators and positional constraints.
//! - [`recon`]: the encoding operator and reconstruction oracles.
//! - [`objective`]: efficacy criteria, quality metrics and importance maps.
//! - [`optimize`]: BASS plus greedy and POSS-style baselines.
//! - [`data`]: synthetic phantoms and file formats.

pub mod data;
pub mod dataset;
pub mod error;
pub mod fft;
pub mod grid;
pub mod objective;
pub mod optimize;
pub mod pattern;
pub mod recon;
pub mod sampling;
pub mod volume;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use grid::KSpaceGrid;
pub use pattern::{
    acceleration_factor, apply_sampling, embed_sampled, AccelerationFactor, SamplingPattern,
};
pub use volume::{ImageVolume, MultiCoilKSpace, Sampled, C64};
