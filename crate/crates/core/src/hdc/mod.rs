//! Hyperdimensional encoding of feature vectors and the packed integer
//! representation stored in multi-level cells.

mod encode;
mod item_memory;
mod pack;

pub use encode::{encode, quantize_level};
pub use item_memory::ItemMemory;
pub use pack::{dot_bipolar, dot_packed, hamming, pack, padded_dimension, PackedHv};

use crate::error::{Error, Result};

/// A vector with elements in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipolarHv(Vec<i8>);

impl BipolarHv {
    pub fn new(elems: Vec<i8>) -> Result<Self> {
        if elems.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::param("bipolar elements must be -1 or +1"));
        }
        Ok(Self(elems))
    }

    pub(crate) fn from_raw(elems: Vec<i8>) -> Self {
        debug_assert!(elems.iter().all(|&e| e == 1 || e == -1));
        Self(elems)
    }

    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self((0..dim).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    /// Element-wise sign of the sum of `members`, with sign(0) = -1.
    pub fn bundle<'a>(members: impl IntoIterator<Item = &'a BipolarHv>) -> Result<Self> {
        let mut acc: Vec<i32> = Vec::new();
        for hv in members {
            if acc.is_empty() {
                acc = vec![0; hv.dim()];
            } else if acc.len() != hv.dim() {
                return Err(Error::param("bundle: dimension mismatch"));
            }
            acc.iter_mut().zip(&hv.0).for_each(|(a, &e)| *a += e as i32);
        }
        if acc.is_empty() {
            return Err(Error::param("bundle: no members"));
        }
        Ok(Self(acc.into_iter().map(sign).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negate(&self) -> Self {
        Self(self.0.iter().map(|&e| -e).collect())
    }
}

/// +1 for positive input, -1 otherwise.
pub(crate) fn sign(x: i32) -> i8 {
    if x > 0 {
        1
    } else {
        -1
    }
}
