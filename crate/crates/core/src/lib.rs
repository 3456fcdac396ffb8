//! Behavioral simulator and algorithm library for a phase-change-memory
//! in-memory-computing accelerator targeting mass-spectrometry workloads.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectra`]: MGF parsing, spectrum preprocessing and precursor bucketing.
//! - [`hdc`]: item memories, ID-level encoding, dimension packing and similarity.
//! - [`device`]: measured PCM technology profiles and the programming-noise model.
//! - [`array`]: one 2T2R tile (store, read, MVM with DAC/ADC) and the striped
//!   multi-tile machine.
//! - [`isa`]: the three-instruction control ISA, its text format and interpreter.
//! - [`cost`]: component catalog, cost ledger, energy/latency/area reports.
//! - [`config`] and [`encoder`]: the flat key/value configuration and the
//!   spectrum-to-hypervector front end shared by both pipelines.
//! - [`cluster`] and [`search`]: the two end-to-end pipelines, both lowered
//!   to ISA programs.
//! - [`synth`] and [`dse`]: synthetic datasets and design-space sweeps.
//!
//! All randomness flows through [`rng::SimRng`] so that every run is
//! reproducible from its seed.

pub mod array;
pub mod cluster;
pub mod config;
pub mod cost;
pub mod device;
pub mod encoder;
pub mod dse;
pub mod error;
pub mod hdc;
pub mod isa;
pub mod rng;
pub mod search;
pub mod spectra;
pub mod synth;

pub use error::{Error, Result};
