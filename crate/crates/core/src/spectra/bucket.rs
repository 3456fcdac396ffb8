use std::collections::BTreeMap;

use super::Spectrum;
use crate::error::{Error, Result};

/// Spectra with equal charge and precursor m/z window share a bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BucketKey {
    pub charge: u32,
    pub mz_window_index: i64,
}

impl BucketKey {
    pub fn of(s: &Spectrum, window_width: f64) -> Self {
        Self {
            charge: s.precursor_charge,
            mz_window_index: (s.precursor_mz / window_width).floor() as i64,
        }
    }
}

/// Bucket -> indices into the input slice, in input order.
pub type Buckets = BTreeMap<BucketKey, Vec<usize>>;

pub fn bucketize(spectra: &[Spectrum], window_width: f64) -> Result<Buckets> {
    if !(window_width > 0.0) {
        return Err(Error::param("bucket.window_width must be positive"));
    }
    let mut buckets = Buckets::new();
    for (i, s) in spectra.iter().enumerate() {
        buckets.entry(BucketKey::of(s, window_width)).or_default().push(i);
    }
    Ok(buckets)
}
