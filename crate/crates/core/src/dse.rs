//! Design-space sweeps: every point of a cross product of configuration
//! values runs a workload end to end and reports quality, energy and
//! latency.

use rayon::prelude::*;

use crate::cluster::cluster_encoded;
use crate::config::{Config, Workload};
use crate::cost::{CostLedger, Phase};
use crate::encoder::Encoder;
use crate::error::{Error, Result};
use crate::search::search_spectra;
use crate::spectra::Spectrum;

/// Keys a sweep may vary.
pub const AXES: &[&str] = &["pack.n", "adc.bits", "hd.dimension", "noise.wv_cycles", "cluster.threshold"];

/// Thresholds scanned when scoring clustering quality.
const QUALITY_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Axis name and its values, in sweep order (first axis slowest).
    pub axes: Vec<(String, Vec<String>)>,
    pub repetitions: usize,
    /// Repetition `r` runs with seed `seed_base + r`.
    pub seed_base: u64,
}

impl SweepSpec {
    pub fn new(repetitions: usize, seed_base: u64) -> Self {
        Self {
            axes: Vec::new(),
            repetitions,
            seed_base,
        }
    }

    /// Adds an axis from `name=v1,v2,...`.
    pub fn with_axis(mut self, spec: &str) -> Result<Self> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::param(format!("axis `{spec}` must look like name=v1,v2")))?;
        let name = name.trim();
        if !AXES.contains(&name) {
            return Err(Error::Config {
                key: name.to_string(),
                msg: format!("not a sweepable axis (expected one of {})", AXES.join(", ")),
            });
        }
        if self.axes.iter().any(|(n, _)| n == name) {
            return Err(Error::param(format!("axis `{name}` given twice")));
        }
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if values.iter().any(String::is_empty) {
            return Err(Error::param(format!("axis `{name}` has an empty value")));
        }
        self.axes.push((name.to_string(), values));
        Ok(self)
    }

    /// Every parameter tuple times every repetition.
    pub fn cells(&self) -> Vec<Cell> {
        let mut tuples: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (name, values) in &self.axes {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    values.iter().map(move |v| {
                        let mut t = t.clone();
                        t.push((name.clone(), v.clone()));
                        t
                    })
                })
                .collect();
        }
        tuples
            .into_iter()
            .flat_map(|params| {
                (0..self.repetitions).map(move |rep| Cell {
                    params: params.clone(),
                    rep,
                    seed: self.seed_base + rep as u64,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub params: Vec<(String, String)>,
    pub rep: usize,
    pub seed: u64,
}

/// Data a sweep runs on.
#[derive(Debug, Clone, Copy)]
pub enum SweepWorkload<'a> {
    Cluster { spectra: &'a [Spectrum] },
    Search { queries: &'a [Spectrum], refs: &'a [Spectrum] },
}

impl SweepWorkload<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            SweepWorkload::Cluster { .. } => "cluster",
            SweepWorkload::Search { .. } => "search",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    /// Clustering: best `clustered * (1 - incorrect)` over thresholds.
    /// Search: fraction of queries whose best match carries their label.
    pub quality: f64,
    pub clustered_ratio: Option<f64>,
    pub incorrect_ratio: Option<f64>,
    pub identified: Option<usize>,
    pub energy_pj: f64,
    pub latency_ns: f64,
    pub phase_energy_pj: [f64; 5],
}

impl CellMetrics {
    fn from_ledger(quality: f64, ledger: &CostLedger) -> Self {
        Self {
            quality,
            clustered_ratio: None,
            incorrect_ratio: None,
            identified: None,
            energy_pj: ledger.energy_pj(),
            latency_ns: ledger.latency_ns(),
            phase_energy_pj: Phase::ALL.map(|p| ledger.phase_energy_pj(p)),
        }
    }

    pub fn phase(&self, p: Phase) -> f64 {
        self.phase_energy_pj[p as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    /// A failed cell keeps its error message; the sweep carries on.
    pub outcome: std::result::Result<CellMetrics, String>,
}

fn labels_of(spectra: &[Spectrum]) -> Option<Vec<&str>> {
    spectra.iter().map(|s| s.label.as_deref()).collect()
}

/// Runs the workload once under `cfg`.
pub fn run_once(workload: SweepWorkload<'_>, cfg: &Config) -> Result<CellMetrics> {
    match workload {
        SweepWorkload::Cluster { spectra } => {
            cfg.validate()?;
            let hvs = Encoder::new(cfg, Workload::Cluster)?.bipolar_all(spectra)?;
            let run = cluster_encoded(spectra, &hvs, cfg)?;
            let quality = match labels_of(spectra) {
                Some(l) => run.quality(&l, QUALITY_STEPS)?,
                None => f64::NAN,
            };
            let mut m = CellMetrics::from_ledger(quality, &run.ledger);
            m.clustered_ratio = run.metrics.map(|x| x.clustered_ratio);
            m.incorrect_ratio = run.metrics.map(|x| x.incorrect_ratio);
            Ok(m)
        }
        SweepWorkload::Search { queries, refs } => {
            let run = search_spectra(queries, refs, cfg)?;
            let label_of = |id: &str| refs.iter().find(|r| r.id == id).and_then(|r| r.label.as_deref());
            let hits = run
                .results
                .iter()
                .filter(|r| {
                    let q = queries.iter().find(|q| q.id == r.query_id).and_then(|q| q.label.as_deref());
                    q.is_some() && q == label_of(&r.ref_id) && !r.is_decoy
                })
                .count();
            let quality = if queries.is_empty() {
                0.0
            } else {
                hits as f64 / queries.len() as f64
            };
            let mut m = CellMetrics::from_ledger(quality, &run.ledger());
            m.identified = Some(run.summary.identified_count);
            Ok(m)
        }
    }
}

/// Runs every cell, at most `jobs` at a time. Results come back in cell
/// order whatever the scheduling.
pub fn run_sweep(spec: &SweepSpec, workload: SweepWorkload<'_>, base: &Config, jobs: usize) -> Result<Vec<CellResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::param(e.to_string()))?;
    let cells = spec.cells();
    Ok(pool.install(|| {
        cells
            .into_par_iter()
            .map(|cell| {
                let outcome = (|| {
                    let mut cfg = base.clone();
                    cfg.seed = cell.seed;
                    for (k, v) in &cell.params {
                        cfg.set(k, v, None)?;
                    }
                    cfg.validate()?;
                    run_once(workload, &cfg)
                })()
                .map_err(|e| e.to_string());
                CellResult { cell, outcome }
            })
            .collect()
    }))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// One row per cell with its parameter values, seed and metrics.
pub fn results_csv(spec: &SweepSpec, workload: &str, results: &[CellResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["workload".into()];
    header.extend(spec.axes.iter().map(|(n, _)| n.clone()));
    header.extend(
        [
            "rep",
            "seed",
            "status",
            "error",
            "quality",
            "clustered_ratio",
            "incorrect_ratio",
            "identified",
            "energy_pj",
            "latency_ns",
        ]
        .map(String::from),
    );
    header.extend(Phase::ALL.iter().map(|p| format!("{}_energy_pj", p.key())));
    w.write_record(&header)?;
    for r in results {
        let mut row: Vec<String> = vec![workload.to_string()];
        row.extend(r.cell.params.iter().map(|(_, v)| v.clone()));
        row.push(r.cell.rep.to_string());
        row.push(r.cell.seed.to_string());
        match &r.outcome {
            Ok(m) => {
                row.extend(["ok".to_string(), String::new(), m.quality.to_string()]);
                row.push(opt(m.clustered_ratio));
                row.push(opt(m.incorrect_ratio));
                row.push(opt(m.identified));
                row.push(m.energy_pj.to_string());
                row.push(m.latency_ns.to_string());
                row.extend(m.phase_energy_pj.iter().map(f64::to_string));
            }
            Err(e) => {
                row.extend(["error".to_string(), e.clone()]);
                row.extend(std::iter::repeat_n(String::new(), 6 + Phase::ALL.len()));
            }
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::param(e.to_string()))?).expect("utf-8 csv"))
}
