//! Mass spectra: MGF input/output, preprocessing into fixed-length feature
//! vectors, and partitioning into precursor buckets.

mod bucket;
mod mgf;
mod preprocess;

pub use bucket::{bucketize, BucketKey, Buckets};
pub use mgf::{parse_mgf, parse_mgf_str, write_mgf, write_mgf_string, MgfReport, RecordError};
pub use preprocess::{preprocess, FeatureVector, PreprocessConfig};

/// Title prefix marking decoy spectra.
pub const DECOY_PREFIX: &str = "DECOY_";

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub mz: f64,
    pub intensity: f64,
}

impl Peak {
    pub fn new(mz: f64, intensity: f64) -> Self {
        Self { mz, intensity }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub id: String,
    pub precursor_mz: f64,
    pub precursor_charge: u32,
    /// Sorted ascending by m/z.
    pub peaks: Vec<Peak>,
    pub is_decoy: bool,
    /// Ground-truth peptide, when known.
    pub label: Option<String>,
}

impl Spectrum {
    /// Builds a spectrum, sorting the peaks and deriving the decoy flag from
    /// the id prefix.
    pub fn new(id: impl Into<String>, precursor_mz: f64, precursor_charge: u32, mut peaks: Vec<Peak>) -> Self {
        let id = id.into();
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
        Self {
            is_decoy: id.starts_with(DECOY_PREFIX),
            id,
            precursor_mz,
            precursor_charge,
            peaks,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}
