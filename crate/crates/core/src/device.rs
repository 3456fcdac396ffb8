//! PCM device technologies and the programming-noise model.
//!
//! A stored value `w` is read back as `w * (1 + eta)` with
//! `eta ~ N(0, sigma^2)`. Each write-verify cycle shrinks sigma by a constant
//! factor down to a floor.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeviceKind {
    /// Sb2Te3/Ge4Sb6Te7 superlattice: low programming energy.
    SbTe,
    /// TiTe2/Ge4Sb6Te7 superlattice: long retention.
    TiTe,
}

impl DeviceKind {
    pub fn profile(self) -> &'static DeviceProfile {
        match self {
            DeviceKind::SbTe => &SBTE_GST467,
            DeviceKind::TiTe => &TITE_GST467,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            DeviceKind::SbTe => "sbte",
            DeviceKind::TiTe => "tite",
        }
    }
}

impl std::str::FromStr for DeviceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sbte" => Ok(DeviceKind::SbTe),
            "tite" => Ok(DeviceKind::TiTe),
            other => Err(Error::param(format!("unknown device kind `{other}` (expected sbte or tite)"))),
        }
    }
}

/// Measured parameters of one PCM technology.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub kind: DeviceKind,
    pub name: &'static str,
    pub prog_current_ua: f64,
    pub prog_voltage_v: f64,
    /// Energy per cell per programming pulse.
    pub prog_energy_pj: f64,
    /// Retention at 105 C. For TiTe this is a lower bound.
    pub retention_105c_hours: f64,
    pub low_resistance_kohm: f64,
    pub on_off_ratio: f64,
    pub endurance_cycles: f64,
}

pub static SBTE_GST467: DeviceProfile = DeviceProfile {
    kind: DeviceKind::SbTe,
    name: "Sb2Te3/Ge4Sb6Te7",
    prog_current_ua: 80.0,
    prog_voltage_v: 0.7,
    prog_energy_pj: 1.12,
    retention_105c_hours: 30.0,
    low_resistance_kohm: 30.0,
    on_off_ratio: 150.0,
    endurance_cycles: 1e8,
};

pub static TITE_GST467: DeviceProfile = DeviceProfile {
    kind: DeviceKind::TiTe,
    name: "TiTe2/Ge4Sb6Te7",
    prog_current_ua: 160.0,
    prog_voltage_v: 0.9,
    prog_energy_pj: 2.88,
    retention_105c_hours: 1e5,
    low_resistance_kohm: 10.0,
    on_off_ratio: 100.0,
    endurance_cycles: 1e8,
};

/// Relative conductance spread as a function of write-verify cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseParams {
    pub sigma0: f64,
    /// Per-cycle reduction factor in (0, 1).
    pub rho: f64,
    pub sigma_min: f64,
    /// Measured sigma per (mlc_bits, wv_cycles); takes precedence.
    pub table: BTreeMap<(u8, u32), f64>,
    /// One sigma for every setting; overrides both the table and the model.
    pub fixed: Option<f64>,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma0: 0.12,
            rho: 0.55,
            sigma_min: 0.01,
            table: BTreeMap::new(),
            fixed: None,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 > self.sigma_min && self.sigma_min >= 0.0) {
            return Err(Error::param("noise: require sigma0 > sigma_min >= 0"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::param("noise: rho must lie in (0, 1)"));
        }
        if self.table.values().chain(&self.fixed).any(|&s| !(s >= 0.0)) {
            return Err(Error::param("noise: table sigmas must be non-negative"));
        }
        Ok(())
    }

    /// Reads `mlc_bits,wv_cycles,sigma` rows; a header row is allowed.
    pub fn load_table(path: impl AsRef<Path>) -> Result<BTreeMap<(u8, u32), f64>> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [b, c, s] => (b.parse::<u8>(), c.parse::<u32>(), s.parse::<f64>()),
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "expected mlc_bits,wv_cycles,sigma".into(),
                    })
                }
            };
            match parsed {
                (Ok(b), Ok(c), Ok(s)) => {
                    table.insert((b, c), s);
                }
                _ if idx == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("invalid noise table row `{line}`"),
                    })
                }
            }
        }
        Ok(table)
    }
}

/// A device technology paired with its noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub profile: DeviceProfile,
    pub noise: NoiseParams,
}

impl DeviceModel {
    pub fn new(kind: DeviceKind, noise: NoiseParams) -> Self {
        Self {
            profile: kind.profile().clone(),
            noise,
        }
    }

    pub fn kind(&self) -> DeviceKind {
        self.profile.kind
    }

    pub fn sigma_for(&self, mlc_bits: u8, wv_cycles: u32) -> f64 {
        if let Some(s) = self.noise.fixed {
            return s;
        }
        if let Some(&s) = self.noise.table.get(&(mlc_bits, wv_cycles)) {
            return s;
        }
        let np = &self.noise;
        (np.sigma0 * np.rho.powi(wv_cycles.min(i32::MAX as u32) as i32)).max(np.sigma_min)
    }

    pub fn bit_error_rate(&self, mlc_bits: u8, wv_cycles: u32) -> f64 {
        ber_at_sigma(mlc_bits, self.sigma_for(mlc_bits, wv_cycles))
    }
}

/// Misread probability of the full-scale level of a cell with `2^mlc_bits`
/// evenly spaced levels: `P(|eta| > gap / 2)` with the gap normalised to
/// full scale.
pub fn ber_at_sigma(mlc_bits: u8, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let half_gap = 0.5 / ((1u32 << mlc_bits) - 1) as f64;
    erfc(half_gap / (sigma * std::f64::consts::SQRT_2))
}

/// Sigma at which [`ber_at_sigma`] equals `target`.
pub fn sigma_for_ber(mlc_bits: u8, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::param("target bit error rate must lie in (0, 1)"));
    }
    // ber_at_sigma is increasing in sigma; bisect on a log scale.
    let (mut lo, mut hi) = (1e-6f64, 1e3f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if ber_at_sigma(mlc_bits, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Returns `w * (1 + eta)` with `eta ~ N(0, sigma^2)`.
pub fn apply_noise<R: Rng + ?Sized>(w: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return w;
    }
    let eta = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative").sample(rng);
    w * (1.0 + eta)
}

/// Power-law resistance drift `r0 * (t / t0)^nu`.
pub fn drift_resistance(r0_kohm: f64, t_s: f64, t0_s: f64, nu: f64) -> Result<f64> {
    if !(r0_kohm > 0.0 && t0_s > 0.0 && nu >= 0.0) {
        return Err(Error::param("drift: require r0 > 0, t0 > 0, nu >= 0"));
    }
    if t_s < t0_s {
        return Err(Error::param("drift: t must not precede t0"));
    }
    Ok(r0_kohm * (t_s / t0_s).powf(nu))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnduranceReport {
    pub writes_per_cell: u64,
    pub endurance_cycles: f64,
    pub remaining_fraction: f64,
    /// Number of complete workloads of this write intensity the cells survive.
    pub supported_processes: f64,
}

pub fn endurance_check(writes_per_cell: u64, profile: &DeviceProfile) -> EnduranceReport {
    let used = writes_per_cell as f64;
    EnduranceReport {
        writes_per_cell,
        endurance_cycles: profile.endurance_cycles,
        remaining_fraction: (1.0 - used / profile.endurance_cycles).max(0.0),
        supported_processes: profile.endurance_cycles / used.max(1.0),
    }
}

/// Whether a workload of `duration_hours` fits within the 105 C retention.
pub fn within_retention(profile: &DeviceProfile, duration_hours: f64) -> bool {
    duration_hours <= profile.retention_105c_hours
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn table_s1_constants() {
        let s = DeviceKind::SbTe.profile();
        assert_eq!(
            (s.prog_current_ua, s.prog_voltage_v, s.prog_energy_pj),
            (80.0, 0.7, 1.12)
        );
        assert_eq!(
            (s.retention_105c_hours, s.low_resistance_kohm, s.on_off_ratio, s.endurance_cycles),
            (30.0, 30.0, 150.0, 1e8)
        );
        let t = DeviceKind::TiTe.profile();
        assert_eq!(
            (t.prog_current_ua, t.prog_voltage_v, t.prog_energy_pj),
            (160.0, 0.9, 2.88)
        );
        assert_eq!(
            (t.retention_105c_hours, t.low_resistance_kohm, t.on_off_ratio, t.endurance_cycles),
            (1e5, 10.0, 100.0, 1e8)
        );
        let ratio = t.prog_energy_pj / s.prog_energy_pj;
        assert!((ratio - 2.571).abs() < 1e-3);
        assert!((ratio - 2.6).abs() < 0.05);
    }

    #[test]
    fn sigma_schedule() {
        let base = DeviceModel::new(DeviceKind::SbTe, NoiseParams::default());
        assert_eq!(base.sigma_for(3, 0), 0.12);
        let m = DeviceModel::new(
            DeviceKind::SbTe,
            NoiseParams {
                rho: 0.5,
                ..NoiseParams::default()
            },
        );
        assert!((m.sigma_for(3, 3) - 0.015).abs() < 1e-15);
        assert_eq!(m.sigma_for(3, 40), 0.01);

        let mut np = NoiseParams::default();
        np.table.insert((3, 3), 0.02);
        let m = DeviceModel::new(DeviceKind::TiTe, np);
        assert_eq!(m.sigma_for(3, 3), 0.02);
        assert_eq!(m.sigma_for(2, 3), base.sigma_for(2, 3));
    }

    #[test]
    fn ber_shape() {
        for kind in [DeviceKind::SbTe, DeviceKind::TiTe] {
            let m = DeviceModel::new(kind, NoiseParams::default());
            for bits in 1..=3 {
                let bers: Vec<f64> = (0..=5).map(|wv| m.bit_error_rate(bits, wv)).collect();
                assert!(bers.windows(2).all(|w| w[0] >= w[1]), "{bers:?}");
            }
            let s3: Vec<f64> = (0..=5).map(|wv| m.bit_error_rate(3, wv)).collect();
            assert!(s3.windows(2).all(|w| w[0] > w[1]), "{s3:?}");
            // The uncorrected 3-bit cell sits in the >10% regime.
            assert!(m.bit_error_rate(3, 0) > 0.1);
        }
        for sigma in [0.01, 0.05, 0.12] {
            assert!(ber_at_sigma(3, sigma) >= ber_at_sigma(2, sigma));
            assert!(ber_at_sigma(2, sigma) >= ber_at_sigma(1, sigma));
        }
        assert_eq!(ber_at_sigma(3, 0.0), 0.0);
    }

    #[test]
    fn ber_inverse() {
        let s = sigma_for_ber(3, 0.1).unwrap();
        assert!((ber_at_sigma(3, s) - 0.1).abs() < 1e-9);
        // Half gap 1/14 sits at the 95% two-sided normal quantile.
        assert!((s - (1.0 / 14.0) / 1.6448536269514722).abs() < 1e-6);
    }

    #[test]
    fn noise_moments() {
        let mut rng = rng::seeded(42);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| apply_noise(1.0, 0.1, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 0.001, "mean {mean}");
        assert!((var.sqrt() - 0.1).abs() < 0.002, "std {}", var.sqrt());
    }

    #[test]
    fn noise_edge_cases() {
        let mut rng = rng::seeded(1);
        assert_eq!(apply_noise(2.5, 0.0, &mut rng), 2.5);
        assert_eq!(apply_noise(0.0, 0.3, &mut rng), 0.0);
        let a: Vec<f64> = {
            let mut r = rng::seeded(5);
            (0..10).map(|_| apply_noise(3.0, 0.1, &mut r)).collect()
        };
        let b: Vec<f64> = {
            let mut r = rng::seeded(5);
            (0..10).map(|_| apply_noise(3.0, 0.1, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn drift() {
        assert_eq!(drift_resistance(10.0, 500.0, 1.0, 0.0).unwrap(), 10.0);
        assert_eq!(drift_resistance(10.0, 3.0, 3.0, 0.05).unwrap(), 10.0);
        let r = drift_resistance(10.0, 100.0, 1.0, 0.05).unwrap();
        assert!((r - 12.589).abs() < 1e-3);
        assert!(drift_resistance(10.0, 0.5, 1.0, 0.05).is_err());
    }

    #[test]
    fn endurance() {
        let p = DeviceKind::SbTe.profile();
        assert_eq!(endurance_check(100, p).supported_processes, 1e6);
        let full = endurance_check(0, p);
        assert_eq!(full.remaining_fraction, 1.0);
        assert_eq!(full.supported_processes, 1e8);
        assert_eq!(endurance_check(100_000_000, p).supported_processes, 1.0);
        assert!(within_retention(p, 24.0));
        assert!(!within_retention(p, 48.0));
    }

    #[test]
    fn noise_table_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "mlc_bits,wv_cycles,sigma\n3,3,0.02\n1,0,0.05\n").unwrap();
        let t = NoiseParams::load_table(&path).unwrap();
        assert_eq!(t.get(&(3, 3)), Some(&0.02));
        assert_eq!(t.len(), 2);
        std::fs::write(&path, "3,3,0.02\n3,x\n").unwrap();
        assert!(NoiseParams::load_table(&path).is_err());
    }
}
