use super::Spectrum;
use crate::error::{Error, Result};

/// Peak filtering and binning recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub mz_min: f64,
    pub mz_max: f64,
    pub bin_width: f64,
    pub top_k: usize,
    /// Apply a square root to intensities before binning.
    pub sqrt_intensity: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            mz_min: 101.0,
            mz_max: 1500.0,
            bin_width: 1.0005,
            top_k: 50,
            sqrt_intensity: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mz_min < self.mz_max) {
            return Err(Error::param("preprocess.mz_min must be below preprocess.mz_max"));
        }
        if !(self.bin_width > 0.0) {
            return Err(Error::param("preprocess.bin_width must be positive"));
        }
        if self.top_k == 0 {
            return Err(Error::param("preprocess.top_k must be at least 1"));
        }
        Ok(())
    }

    /// Feature count F.
    pub fn num_bins(&self) -> usize {
        ((self.mz_max - self.mz_min) / self.bin_width).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub l_min: f64,
    pub l_max: f64,
    /// No peak survived filtering.
    pub empty: bool,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn preprocess(s: &Spectrum, cfg: &PreprocessConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let bins = cfg.num_bins();
    let mut values = vec![0.0; bins];

    let mut kept: Vec<_> = s
        .peaks
        .iter()
        .filter(|p| p.mz >= cfg.mz_min && p.mz <= cfg.mz_max)
        .collect();
    // Stable sort keeps m/z order among equal intensities.
    kept.sort_by(|a, b| b.intensity.total_cmp(&a.intensity));
    kept.truncate(cfg.top_k);

    for p in &kept {
        let bin = (((p.mz - cfg.mz_min) / cfg.bin_width).floor() as usize).min(bins - 1);
        values[bin] += if cfg.sqrt_intensity { p.intensity.sqrt() } else { p.intensity };
    }

    let max = values.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
    Ok(FeatureVector {
        values,
        l_min: 0.0,
        l_max: 1.0,
        empty: kept.is_empty(),
    })
}
