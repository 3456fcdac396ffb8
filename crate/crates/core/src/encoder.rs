//! Spectrum to hypervector: preprocessing, ID-level encoding and packing
//! with one shared item memory.

use rayon::prelude::*;

use crate::config::{Config, Workload};
use crate::error::Result;
use crate::hdc::{encode, pack, padded_dimension, BipolarHv, ItemMemory, PackedHv};
use crate::spectra::{preprocess, PreprocessConfig, Spectrum};

#[derive(Debug, Clone)]
pub struct Encoder {
    preprocess: PreprocessConfig,
    item_memory: ItemMemory,
    n: u8,
    skip_zero: bool,
}

impl Encoder {
    /// The dimension is padded up to a multiple of the pack factor.
    pub fn new(cfg: &Config, workload: Workload) -> Result<Self> {
        cfg.preprocess.validate()?;
        let dim = padded_dimension(cfg.dimension(workload), cfg.pack_n as usize);
        Ok(Self {
            item_memory: ItemMemory::generate(cfg.hd_seed, dim, cfg.preprocess.num_bins(), cfg.hd_levels)?,
            preprocess: cfg.preprocess.clone(),
            n: cfg.pack_n,
            skip_zero: cfg.skip_zero,
        })
    }

    pub fn dim(&self) -> usize {
        self.item_memory.dim()
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn bipolar(&self, s: &Spectrum) -> Result<BipolarHv> {
        encode(&preprocess(s, &self.preprocess)?, &self.item_memory, self.skip_zero)
    }

    pub fn packed(&self, s: &Spectrum) -> Result<PackedHv> {
        pack(&self.bipolar(s)?, self.n)
    }

    /// Encodes every spectrum in parallel, preserving order.
    pub fn bipolar_all(&self, spectra: &[Spectrum]) -> Result<Vec<BipolarHv>> {
        spectra.par_iter().map(|s| self.bipolar(s)).collect()
    }

    pub fn packed_all(&self, spectra: &[Spectrum]) -> Result<Vec<PackedHv>> {
        spectra.par_iter().map(|s| self.packed(s)).collect()
    }
}
