//! Per-bucket spectral clustering on the simulated machine.
//!
//! Each bucket's vectors are programmed into a fresh machine, a distance
//! matrix is measured through ISA programs, complete linkage runs on that
//! matrix, and every merged cluster's representative is written back.
//! Buckets are independent and run in parallel, each with its own random
//! stream.

mod linkage;
mod lower;
mod metrics;

pub use linkage::{agglomerate, ClusterAssignment, DistanceMatrix, Merge};
pub use lower::{
    build_distance_matrix, distance_matrix_from_trace, distance_program, score_to_distance, store_row,
    writeback_program, LoweringParams,
};
pub use metrics::{cluster_metrics, ClusterMetrics};

use rand::Rng;
use rayon::prelude::*;

use crate::array::{MachineLayout, MachineState};
use crate::config::{Config, Workload};
use crate::cost::CostLedger;
use crate::encoder::Encoder;
use crate::error::{Error, Result};
use crate::hdc::{pack, BipolarHv, PackedHv};
use crate::isa::run;
use crate::rng;
use crate::spectra::{bucketize, Spectrum};

/// Outcome of clustering one bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketRun {
    pub distances: DistanceMatrix,
    pub assignment: ClusterAssignment,
    pub ledger: CostLedger,
    pub max_writes_per_cell: u32,
}

/// Clusters one bucket of encoded spectra on its own machine.
pub fn cluster_bucket<R: Rng + ?Sized>(hvs: &[BipolarHv], cfg: &Config, rng: &mut R) -> Result<BucketRun> {
    let n = cfg.pack_n;
    let packed: Vec<PackedHv> = hvs.iter().map(|h| pack(h, n)).collect::<Result<_>>()?;
    let len = packed.first().ok_or_else(|| Error::param("empty bucket"))?.len();
    let layout = MachineLayout::for_vectors(len, packed.len(), cfg.array_rows, cfg.array_cols);
    let mut m = MachineState::new(layout, cfg.machine_config(Workload::Cluster), cfg.num_arrays)?;
    let params = LoweringParams {
        adc_bits: cfg.adc_bits,
        write_cycles: cfg.write_cycles(Workload::Cluster),
    };
    let distances = build_distance_matrix(&packed, &mut m, params, rng)?;
    let assignment = agglomerate(&distances, cfg.cluster_threshold)?;
    let wb = writeback_program(&assignment, hvs, n, &layout, params.write_cycles)?;
    run(&wb, &mut m, rng)?;
    Ok(BucketRun {
        distances,
        assignment,
        ledger: m.ledger.clone(),
        max_writes_per_cell: m.max_writes_per_cell(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRun {
    /// Global cluster id per input spectrum, numbered from 0 in bucket order.
    pub cluster_ids: Vec<usize>,
    /// Present when every spectrum carries a label.
    pub metrics: Option<ClusterMetrics>,
    pub ledger: CostLedger,
    /// Input indices of each bucket, in bucket order.
    pub buckets: Vec<Vec<usize>>,
    /// Measured distances per bucket; `None` for single-spectrum buckets.
    pub distances: Vec<Option<DistanceMatrix>>,
    pub max_writes_per_cell: u32,
}

impl ClusterRun {
    pub fn num_buckets(&self) -> usize {
        self.buckets.len()
    }

    /// Metrics had clustering stopped at `threshold`, reusing the measured
    /// distances.
    pub fn metrics_at<L: AsRef<str>>(&self, threshold: f64, labels: &[L]) -> Result<ClusterMetrics> {
        let mut keys = vec![(0usize, 0usize); labels.len()];
        for (b, (members, dm)) in self.buckets.iter().zip(&self.distances).enumerate() {
            let local = match dm {
                Some(dm) => agglomerate(dm, threshold)?.cluster_of,
                None => vec![0; members.len()],
            };
            for (&i, c) in members.iter().zip(local) {
                keys[i] = (b, c);
            }
        }
        Ok(cluster_metrics(&keys, labels))
    }

    /// Largest clustered ratio over a grid of `steps + 1` thresholds in
    /// [0, 1] whose incorrect ratio stays at or below `max_incorrect`.
    pub fn clustered_ratio_at<L: AsRef<str>>(&self, labels: &[L], max_incorrect: f64, steps: usize) -> Result<f64> {
        let mut best = 0.0f64;
        for k in 0..=steps {
            let m = self.metrics_at(k as f64 / steps as f64, labels)?;
            if m.incorrect_ratio <= max_incorrect {
                best = best.max(m.clustered_ratio);
            }
        }
        Ok(best)
    }

    /// Best fraction of spectra that are clustered with their own majority,
    /// `clustered_ratio * (1 - incorrect_ratio)`, over `steps + 1`
    /// thresholds in [0, 1]. Independent of where the threshold is set.
    pub fn quality<L: AsRef<str>>(&self, labels: &[L], steps: usize) -> Result<f64> {
        let mut best = 0.0f64;
        for k in 0..=steps {
            let m = self.metrics_at(k as f64 / steps as f64, labels)?;
            best = best.max(m.clustered_ratio * (1.0 - m.incorrect_ratio));
        }
        Ok(best)
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_ids.iter().max().map_or(0, |&m| m + 1)
    }

    /// `spectrum_id,cluster_id` rows.
    pub fn to_csv(&self, spectra: &[Spectrum]) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["spectrum_id", "cluster_id"])?;
        for (s, c) in spectra.iter().zip(&self.cluster_ids) {
            w.write_record([s.id.as_str(), &c.to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::param(e.to_string()))?).expect("utf-8 csv"))
    }
}

/// Encodes, buckets and clusters `spectra`.
pub fn cluster_spectra(spectra: &[Spectrum], cfg: &Config) -> Result<ClusterRun> {
    cfg.validate()?;
    let encoder = Encoder::new(cfg, Workload::Cluster)?;
    let hvs = encoder.bipolar_all(spectra)?;
    cluster_encoded(spectra, &hvs, cfg)
}

/// Like [`cluster_spectra`] with the spectra already encoded.
pub fn cluster_encoded(spectra: &[Spectrum], hvs: &[BipolarHv], cfg: &Config) -> Result<ClusterRun> {
    if spectra.len() != hvs.len() {
        return Err(Error::param("one vector per spectrum required"));
    }
    let buckets: Vec<Vec<usize>> = bucketize(spectra, cfg.bucket_window)?.into_values().collect();
    let runs: Vec<Option<BucketRun>> = buckets
        .par_iter()
        .enumerate()
        .map(|(ordinal, members)| {
            if members.len() < 2 {
                return Ok(None);
            }
            let local: Vec<BipolarHv> = members.iter().map(|&i| hvs[i].clone()).collect();
            cluster_bucket(&local, cfg, &mut rng::for_stream(cfg.seed, ordinal as u64)).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut cluster_ids = vec![0; spectra.len()];
    let mut ledger = CostLedger::new();
    let mut next = 0;
    let mut max_writes = 0;
    for (members, r) in buckets.iter().zip(&runs) {
        let local_of: Vec<usize> = match r {
            Some(r) => {
                ledger.merge(&r.ledger);
                max_writes = max_writes.max(r.max_writes_per_cell);
                r.assignment.cluster_of.clone()
            }
            None => vec![0; members.len()],
        };
        let mut global = std::collections::BTreeMap::new();
        for (&i, &c) in members.iter().zip(&local_of) {
            let id = *global.entry(c).or_insert_with(|| {
                next += 1;
                next - 1
            });
            cluster_ids[i] = id;
        }
    }
    let labels: Option<Vec<&str>> = spectra.iter().map(|s| s.label.as_deref()).collect();
    Ok(ClusterRun {
        metrics: labels.map(|l| cluster_metrics(&cluster_ids, &l)),
        cluster_ids,
        ledger,
        distances: runs.into_iter().map(|r| r.map(|r| r.distances)).collect(),
        buckets,
        max_writes_per_cell: max_writes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthParams};

    #[test]
    fn synthetic_classes_cluster() {
        let data = generate(&SynthParams::default()).unwrap();
        let cfg = Config::default();
        let run = cluster_spectra(&data.copies, &cfg).unwrap();
        let labels: Vec<&str> = data.copies.iter().map(|s| s.label.as_deref().unwrap()).collect();
        assert_eq!(run.metrics_at(cfg.cluster_threshold, &labels).unwrap(), run.metrics.unwrap());
        assert!(run.quality(&labels, 50).unwrap() > 0.9);
        assert!(run.metrics.unwrap().clustered_ratio > 0.5);
        assert_eq!(run.cluster_ids.len(), 200);
        assert!(run.ledger.counts.program_events > 0);
    }

    #[test]
    fn deterministic_and_parallel_safe() {
        let p = SynthParams {
            precursor_windows: 4,
            ..SynthParams::default()
        };
        let data = generate(&p).unwrap();
        let cfg = Config::default();
        let a = cluster_spectra(&data.copies, &cfg).unwrap();
        let b = cluster_spectra(&data.copies, &cfg).unwrap();
        assert!(a.num_buckets() > 1);
        assert_eq!(a, b);
    }
}
