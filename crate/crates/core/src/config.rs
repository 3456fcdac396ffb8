//! Run configuration: one flat text file of dotted `key = value` lines.
//!
//! The file is TOML restricted to scalar values, so `hd.dimension = 4096`
//! and a `[hd]` table containing `dimension = 4096` are equivalent. Every
//! key must appear in [`KEYS`]; anything else is rejected with an error that
//! names the key.
//!
//! A few settings differ between the clustering and search pipelines when
//! left unset (HD dimension, device technology, write-verify cycles); see
//! [`Workload`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::array::MachineConfig;
use crate::device::{DeviceKind, DeviceModel, NoiseParams};
use crate::error::{Error, Result};
use crate::spectra::PreprocessConfig;

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "run seed for programming noise and synthetic data"),
    ("preprocess.mz_min", "lowest m/z kept"),
    ("preprocess.mz_max", "highest m/z kept"),
    ("preprocess.bin_width", "m/z bin width"),
    ("preprocess.top_k", "most intense peaks kept per spectrum"),
    ("preprocess.sqrt_intensity", "square-root intensity transform"),
    ("bucket.window_width", "precursor m/z window of one clustering bucket"),
    ("hd.dimension", "hypervector dimension D (cluster 2048, search 8192)"),
    ("hd.levels", "number of quantisation levels m"),
    ("hd.seed", "item-memory seed"),
    ("pack.n", "bits per cell; also the packing factor (1..=3)"),
    ("encode.skip_zero", "leave empty bins out of the encoding sum"),
    ("device.kind", "sbte or tite (cluster sbte, search tite)"),
    ("noise.sigma0", "relative programming noise with no write-verify"),
    ("noise.rho", "noise reduction per write-verify cycle"),
    ("noise.sigma_min", "noise floor"),
    ("noise.sigma", "fixed sigma for every setting (overrides the model)"),
    ("noise.table", "CSV of measured mlc_bits,wv_cycles,sigma"),
    ("noise.per_read", "redraw noise on every access"),
    ("noise.wv_cycles", "write-verify cycles (cluster 0, search 3)"),
    ("adc.bits", "ADC precision (1..=6)"),
    ("adc.full_scale", "ADC full-scale input; default 4*n*sqrt(cols)"),
    ("adc.bypass", "exact analog sums, for testing"),
    ("dac.bits", "signed DAC precision"),
    ("array.rows", "rows per tile"),
    ("array.cols", "columns per tile"),
    ("machine.num_arrays", "tiles available"),
    ("cluster.threshold", "complete-linkage distance threshold in [0, 1]"),
    ("search.precursor_window", "only compare references within this m/z of the query"),
    ("search.fdr", "target-decoy FDR level"),
    ("search.unique_peptides", "count distinct peptide labels instead of PSMs"),
];

/// Which pipeline a setting is being resolved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    Cluster,
    Search,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    pub bucket_window: f64,
    pub hd_dimension: Option<usize>,
    pub hd_levels: usize,
    pub hd_seed: u64,
    pub pack_n: u8,
    pub skip_zero: bool,
    pub device_kind: Option<DeviceKind>,
    pub noise: NoiseParams,
    pub noise_table: Option<PathBuf>,
    pub noise_per_read: bool,
    pub wv_cycles: Option<u32>,
    pub adc_bits: u8,
    pub adc_full_scale: Option<f64>,
    pub adc_bypass: bool,
    pub dac_bits: u8,
    pub array_rows: usize,
    pub array_cols: usize,
    pub num_arrays: usize,
    pub cluster_threshold: f64,
    pub precursor_window: Option<f64>,
    pub fdr: f64,
    pub unique_peptides: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 42,
            preprocess: PreprocessConfig::default(),
            bucket_window: 1.0,
            hd_dimension: None,
            hd_levels: 32,
            hd_seed: 7,
            pack_n: 3,
            skip_zero: true,
            device_kind: None,
            noise: NoiseParams::default(),
            noise_table: None,
            noise_per_read: false,
            wv_cycles: None,
            adc_bits: 6,
            adc_full_scale: None,
            adc_bypass: false,
            dac_bits: 3,
            array_rows: 128,
            array_cols: 128,
            num_arrays: 4096,
            cluster_threshold: 0.42,
            precursor_window: None,
            fdr: 0.01,
            unique_peptides: false,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse().map_err(|e: T::Err| Error::Config {
        key: key.to_string(),
        msg: format!("cannot parse `{raw}`: {e}"),
    })
}

fn optional<T: FromStr>(key: &str, raw: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match raw.trim() {
        "" | "auto" | "none" => Ok(None),
        v => value(key, v).map(Some),
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, String)>) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out)?,
            toml::Value::String(s) => out.push((key, s.clone())),
            toml::Value::Integer(_) | toml::Value::Float(_) | toml::Value::Boolean(_) => out.push((key, v.to_string())),
            _ => {
                return Err(Error::Config {
                    key,
                    msg: "expected a scalar value".into(),
                })
            }
        }
    }
    Ok(())
}

impl Config {
    /// Parses config text. Relative paths (the noise table) resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1));
            Error::Parse {
                line,
                msg: e.message().to_string(),
            }
        })?;
        let mut pairs = Vec::new();
        flatten("", &table, &mut pairs)?;
        let mut cfg = Config::default();
        for (k, v) in pairs {
            cfg.set(&k, &v, base_dir)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    /// Sets one key from its textual value. Does not re-validate the whole
    /// config; call [`Config::validate`] after a batch of changes.
    pub fn set(&mut self, key: &str, raw: &str, base_dir: Option<&Path>) -> Result<()> {
        match key {
            "seed" => self.seed = value(key, raw)?,
            "preprocess.mz_min" => self.preprocess.mz_min = value(key, raw)?,
            "preprocess.mz_max" => self.preprocess.mz_max = value(key, raw)?,
            "preprocess.bin_width" => self.preprocess.bin_width = value(key, raw)?,
            "preprocess.top_k" => self.preprocess.top_k = value(key, raw)?,
            "preprocess.sqrt_intensity" => self.preprocess.sqrt_intensity = value(key, raw)?,
            "bucket.window_width" => self.bucket_window = value(key, raw)?,
            "hd.dimension" => self.hd_dimension = optional(key, raw)?,
            "hd.levels" => self.hd_levels = value(key, raw)?,
            "hd.seed" => self.hd_seed = value(key, raw)?,
            "pack.n" => self.pack_n = value(key, raw)?,
            "encode.skip_zero" => self.skip_zero = value(key, raw)?,
            "device.kind" => {
                self.device_kind = match raw.trim() {
                    "" | "auto" => None,
                    v => Some(v.parse().map_err(|e: Error| Error::Config {
                        key: key.into(),
                        msg: e.to_string(),
                    })?),
                }
            }
            "noise.sigma0" => self.noise.sigma0 = value(key, raw)?,
            "noise.rho" => self.noise.rho = value(key, raw)?,
            "noise.sigma_min" => self.noise.sigma_min = value(key, raw)?,
            "noise.sigma" => self.noise.fixed = optional(key, raw)?,
            "noise.table" => {
                let p = PathBuf::from(raw.trim());
                let p = match base_dir {
                    Some(d) if p.is_relative() => d.join(p),
                    _ => p,
                };
                self.noise.table = NoiseParams::load_table(&p).map_err(|e| Error::Config {
                    key: key.into(),
                    msg: e.to_string(),
                })?;
                self.noise_table = Some(p);
            }
            "noise.per_read" => self.noise_per_read = value(key, raw)?,
            "noise.wv_cycles" => self.wv_cycles = optional(key, raw)?,
            "adc.bits" => self.adc_bits = value(key, raw)?,
            "adc.full_scale" => self.adc_full_scale = optional(key, raw)?,
            "adc.bypass" => self.adc_bypass = value(key, raw)?,
            "dac.bits" => self.dac_bits = value(key, raw)?,
            "array.rows" => self.array_rows = value(key, raw)?,
            "array.cols" => self.array_cols = value(key, raw)?,
            "machine.num_arrays" => self.num_arrays = value(key, raw)?,
            "cluster.threshold" => self.cluster_threshold = value(key, raw)?,
            "search.precursor_window" => self.precursor_window = optional(key, raw)?,
            "search.fdr" => self.fdr = value(key, raw)?,
            "search.unique_peptides" => self.unique_peptides = value(key, raw)?,
            _ => {
                return Err(Error::Config {
                    key: key.to_string(),
                    msg: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| {
            Err(Error::Config {
                key: key.into(),
                msg: msg.into(),
            })
        };
        self.preprocess.validate()?;
        self.noise.validate()?;
        if !(self.bucket_window > 0.0) {
            return bad("bucket.window_width", "must be positive");
        }
        if let Some(d) = self.hd_dimension {
            if d < 2 {
                return bad("hd.dimension", "must be at least 2");
            }
        }
        if self.hd_levels < 2 {
            return bad("hd.levels", "must be at least 2");
        }
        if !(1..=3).contains(&self.pack_n) {
            return bad("pack.n", "must lie in 1..=3");
        }
        if !(1..=6).contains(&self.adc_bits) {
            return bad("adc.bits", "must lie in 1..=6");
        }
        if let Some(s) = self.adc_full_scale {
            if !(s > 0.0) {
                return bad("adc.full_scale", "must be positive");
            }
        }
        if !(1..=8).contains(&self.dac_bits) {
            return bad("dac.bits", "must lie in 1..=8");
        }
        if self.array_rows == 0 || self.array_cols == 0 {
            return bad("array.rows", "tile dimensions must be positive");
        }
        if self.num_arrays == 0 {
            return bad("machine.num_arrays", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.cluster_threshold) {
            return bad("cluster.threshold", "must lie in [0, 1]");
        }
        if let Some(w) = self.precursor_window {
            if !(w > 0.0) {
                return bad("search.precursor_window", "must be positive");
            }
        }
        if !(self.fdr > 0.0 && self.fdr < 1.0) {
            return bad("search.fdr", "must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn dimension(&self, w: Workload) -> usize {
        self.hd_dimension.unwrap_or(match w {
            Workload::Cluster => 2048,
            Workload::Search => 8192,
        })
    }

    pub fn device(&self, w: Workload) -> DeviceKind {
        self.device_kind.unwrap_or(match w {
            Workload::Cluster => DeviceKind::SbTe,
            Workload::Search => DeviceKind::TiTe,
        })
    }

    pub fn write_cycles(&self, w: Workload) -> u32 {
        self.wv_cycles.unwrap_or(match w {
            Workload::Cluster => 0,
            Workload::Search => 3,
        })
    }

    pub fn machine_config(&self, w: Workload) -> MachineConfig {
        let mut m = MachineConfig::new(DeviceModel::new(self.device(w), self.noise.clone()));
        m.dac_bits = self.dac_bits;
        m.adc_full_scale = self.adc_full_scale;
        m.adc_bypass = self.adc_bypass;
        m.noise_per_read = self.noise_per_read;
        m
    }

    /// The effective settings in the same format [`Config::parse`] reads.
    pub fn to_text(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "\"auto\"".to_string(), T::to_string)
        }
        let p = &self.preprocess;
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("seed", self.seed.to_string());
        line("preprocess.mz_min", format!("{:?}", p.mz_min));
        line("preprocess.mz_max", format!("{:?}", p.mz_max));
        line("preprocess.bin_width", format!("{:?}", p.bin_width));
        line("preprocess.top_k", p.top_k.to_string());
        line("preprocess.sqrt_intensity", p.sqrt_intensity.to_string());
        line("bucket.window_width", format!("{:?}", self.bucket_window));
        line("hd.dimension", opt(&self.hd_dimension));
        line("hd.levels", self.hd_levels.to_string());
        line("hd.seed", self.hd_seed.to_string());
        line("pack.n", self.pack_n.to_string());
        line("encode.skip_zero", self.skip_zero.to_string());
        line(
            "device.kind",
            self.device_kind.map_or("\"auto\"".into(), |k| format!("\"{}\"", k.key())),
        );
        line("noise.sigma0", format!("{:?}", self.noise.sigma0));
        line("noise.rho", format!("{:?}", self.noise.rho));
        line("noise.sigma_min", format!("{:?}", self.noise.sigma_min));
        line("noise.sigma", opt(&self.noise.fixed.map(|v| format!("{v:?}"))));
        if let Some(t) = &self.noise_table {
            line("noise.table", format!("{:?}", t.display().to_string()));
        }
        line("noise.per_read", self.noise_per_read.to_string());
        line("noise.wv_cycles", opt(&self.wv_cycles));
        line("adc.bits", self.adc_bits.to_string());
        line("adc.full_scale", opt(&self.adc_full_scale.map(|v| format!("{v:?}"))));
        line("adc.bypass", self.adc_bypass.to_string());
        line("dac.bits", self.dac_bits.to_string());
        line("array.rows", self.array_rows.to_string());
        line("array.cols", self.array_cols.to_string());
        line("machine.num_arrays", self.num_arrays.to_string());
        line("cluster.threshold", format!("{:?}", self.cluster_threshold));
        line(
            "search.precursor_window",
            opt(&self.precursor_window.map(|v| format!("{v:?}"))),
        );
        line("search.fdr", format!("{:?}", self.fdr));
        line("search.unique_peptides", self.unique_peptides.to_string());
        s
    }
}
