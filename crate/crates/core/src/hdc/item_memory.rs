use rand::seq::SliceRandom;

use super::BipolarHv;
use crate::error::{Error, Result};
use crate::rng;

/// Random ID vectors (one per feature position) and correlated level
/// vectors (one per quantization level).
#[derive(Debug, Clone, PartialEq)]
pub struct ItemMemory {
    dim: usize,
    features: usize,
    levels: usize,
    seed: u64,
    // Row-major, `features x dim` and `levels x dim`.
    ids: Vec<i8>,
    level_hvs: Vec<i8>,
}

impl ItemMemory {
    /// Generates the item memory from `seed`.
    ///
    /// Level vectors are built by progressive flipping: LV_1 is random and
    /// LV_{k+1} flips `floor(dim / (2 (levels - 1)))` positions of LV_k that
    /// were never flipped before, so LV_1 and LV_m disagree on close to half
    /// of the dimensions.
    pub fn generate(seed: u64, dim: usize, features: usize, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::param(format!("level count must be at least 2, got {levels}")));
        }
        if dim < 2 {
            return Err(Error::param(format!("dimension must be at least 2, got {dim}")));
        }
        if features == 0 {
            return Err(Error::param("feature count must be at least 1"));
        }
        let mut rng = rng::seeded(seed);

        let mut ids = Vec::with_capacity(features * dim);
        for _ in 0..features {
            ids.extend_from_slice(BipolarHv::random(dim, &mut rng).as_slice());
        }

        let mut level_hvs = Vec::with_capacity(levels * dim);
        level_hvs.extend_from_slice(BipolarHv::random(dim, &mut rng).as_slice());
        let mut order: Vec<usize> = (0..dim).collect();
        order.shuffle(&mut rng);
        let per_step = Self::flips_per_level(dim, levels);
        for step in 0..levels - 1 {
            let start = level_hvs.len() - dim;
            let mut next = level_hvs[start..].to_vec();
            for &pos in &order[step * per_step..(step + 1) * per_step] {
                next[pos] = -next[pos];
            }
            level_hvs.extend_from_slice(&next);
        }

        Ok(Self {
            dim,
            features,
            levels,
            seed,
            ids,
            level_hvs,
        })
    }

    /// Builds an item memory from explicit row-major ID and level tables.
    pub fn from_parts(dim: usize, ids: Vec<i8>, level_hvs: Vec<i8>) -> Result<Self> {
        if dim == 0 || !ids.len().is_multiple_of(dim) || !level_hvs.len().is_multiple_of(dim) {
            return Err(Error::param("item memory tables must be whole multiples of the dimension"));
        }
        if ids.iter().chain(&level_hvs).any(|&e| e != 1 && e != -1) {
            return Err(Error::param("item memory elements must be -1 or +1"));
        }
        let (features, levels) = (ids.len() / dim, level_hvs.len() / dim);
        if features == 0 || levels < 2 {
            return Err(Error::param("item memory needs at least one feature and two levels"));
        }
        Ok(Self {
            dim,
            features,
            levels,
            seed: 0,
            ids,
            level_hvs,
        })
    }

    pub fn flips_per_level(dim: usize, levels: usize) -> usize {
        dim / (2 * (levels - 1))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// ID vector of feature `i` (0-based).
    pub fn id(&self, i: usize) -> &[i8] {
        &self.ids[i * self.dim..(i + 1) * self.dim]
    }

    /// Level vector for level `k` in `1..=levels`.
    pub fn level(&self, k: usize) -> &[i8] {
        assert!((1..=self.levels).contains(&k), "level {k} out of range");
        &self.level_hvs[(k - 1) * self.dim..k * self.dim]
    }
}
