//! Synthetic labelled spectra: random class templates, perturbed copies of
//! each template, and decoys for target-decoy search.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::error::{Error, Result};
use crate::rng;
use crate::spectra::{write_mgf, Peak, Spectrum, DECOY_PREFIX};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub num_classes: usize,
    pub per_class: usize,
    pub peaks_per_spectrum: usize,
    /// Standard deviation of the per-peak m/z shift, in Th.
    pub mz_jitter: f64,
    /// Relative standard deviation of the multiplicative intensity noise.
    pub intensity_noise: f64,
    /// Probability that a copy loses any given peak.
    pub dropout: f64,
    /// Random peaks added to every copy.
    pub noise_peaks: usize,
    /// Fraction of a template's peaks taken from a base spectrum shared by
    /// all templates in its precursor window.
    pub shared_fraction: f64,
    /// Distinct unit-width precursor windows the templates share.
    pub precursor_windows: usize,
    pub charge: u32,
    pub mz_range: (f64, f64),
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            num_classes: 10,
            per_class: 20,
            peaks_per_spectrum: 40,
            mz_jitter: 0.05,
            intensity_noise: 0.4,
            dropout: 0.35,
            noise_peaks: 15,
            shared_fraction: 0.6,
            precursor_windows: 1,
            charge: 2,
            mz_range: (150.0, 1400.0),
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 || self.per_class == 0 || self.peaks_per_spectrum == 0 {
            return Err(Error::param("class count, copies per class and peak count must be positive"));
        }
        if self.precursor_windows == 0 || self.charge == 0 {
            return Err(Error::param("precursor windows and charge must be positive"));
        }
        if !(self.mz_jitter >= 0.0 && self.intensity_noise >= 0.0) {
            return Err(Error::param("jitter and noise must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.shared_fraction) {
            return Err(Error::param("shared fraction must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param("dropout must lie in [0, 1)"));
        }
        if !(self.mz_range.0 > 0.0 && self.mz_range.0 < self.mz_range.1) {
            return Err(Error::param("m/z range must be positive and non-empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    /// One per class, id and label `PEPnnnn`.
    pub templates: Vec<Spectrum>,
    /// One per template, with the peak positions redrawn.
    pub decoys: Vec<Spectrum>,
    /// `per_class` perturbed copies of every template, class-major.
    pub copies: Vec<Spectrum>,
}

impl SynthData {
    /// Templates followed by decoys: a search library.
    pub fn library(&self) -> Vec<Spectrum> {
        self.templates.iter().chain(&self.decoys).cloned().collect()
    }

    /// Writes `spectra.mgf` (the copies) and `library.mgf` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_mgf(dir.join("spectra.mgf"), &self.copies)?;
        write_mgf(dir.join("library.mgf"), &self.library())
    }
}

fn label(class: usize) -> String {
    format!("PEP{class:04}")
}

pub fn generate(p: &SynthParams) -> Result<SynthData> {
    p.validate()?;
    let mut r = rng::for_stream(p.seed, 1);
    let intensity = Exp::new(1.0).expect("valid rate");
    let (lo, hi) = p.mz_range;

    let bases: Vec<Vec<Peak>> = (0..p.precursor_windows)
        .map(|_| {
            (0..p.peaks_per_spectrum)
                .map(|_| Peak::new(r.random_range(lo..hi), 0.05 + intensity.sample(&mut r)))
                .collect()
        })
        .collect();
    let mut templates = Vec::with_capacity(p.num_classes);
    let mut decoys = Vec::with_capacity(p.num_classes);
    for class in 0..p.num_classes {
        let window = r.random_range(0..p.precursor_windows);
        // Centre of a unit window, so small precursor shifts stay inside it.
        let precursor = 400.5 + window as f64;
        let peaks: Vec<Peak> = (0..p.peaks_per_spectrum)
            .map(|k| {
                if r.random_bool(p.shared_fraction) {
                    bases[window][k].clone()
                } else {
                    Peak::new(r.random_range(lo..hi), 0.05 + intensity.sample(&mut r))
                }
            })
            .collect();
        let decoy_peaks = peaks
            .iter()
            .map(|pk| Peak::new(r.random_range(lo..hi), pk.intensity))
            .collect();
        let name = label(class);
        decoys.push(
            Spectrum::new(format!("{DECOY_PREFIX}{name}"), precursor, p.charge, decoy_peaks).with_label(name.clone()),
        );
        templates.push(Spectrum::new(name.clone(), precursor, p.charge, peaks).with_label(name));
    }

    let mut r = rng::for_stream(p.seed, 2);
    let mz_noise = Normal::new(0.0, p.mz_jitter).map_err(|e| Error::param(e.to_string()))?;
    let int_noise = Normal::new(0.0, p.intensity_noise).map_err(|e| Error::param(e.to_string()))?;
    let mut copies = Vec::with_capacity(p.num_classes * p.per_class);
    for t in &templates {
        for copy in 0..p.per_class {
            let mut peaks = Vec::with_capacity(t.peaks.len());
            for pk in &t.peaks {
                if p.dropout > 0.0 && r.random_bool(p.dropout) {
                    continue;
                }
                let mz = (pk.mz + mz_noise.sample(&mut r)).clamp(lo, hi);
                let scale = (1.0 + int_noise.sample(&mut r)).max(0.0);
                peaks.push(Peak::new(mz, pk.intensity * scale));
            }
            for _ in 0..p.noise_peaks {
                peaks.push(Peak::new(r.random_range(lo..hi), 0.05 + intensity.sample(&mut r)));
            }
            let shift = if p.mz_jitter > 0.0 {
                r.random_range(-0.01..0.01)
            } else {
                0.0
            };
            let id = format!("{}.copy{copy:03}", t.id);
            copies.push(Spectrum::new(id, t.precursor_mz + shift, p.charge, peaks).with_label(t.id.clone()));
        }
    }
    Ok(SynthData {
        templates,
        decoys,
        copies,
    })
}
