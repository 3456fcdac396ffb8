use rand::Rng;

use crate::cost::{Event, MAX_ADC_BITS};
use crate::device::{apply_noise, DeviceModel};
use crate::error::{Error, Result};

/// Flash ADC with `bits` of its comparators enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adc {
    pub bits: u8,
    /// Analog magnitude mapped to the top code.
    pub full_scale: f64,
    /// Test mode: return the analog value unquantised.
    pub bypass: bool,
}

impl Adc {
    pub fn step(&self) -> f64 {
        self.full_scale / (1u64 << (self.bits - 1)) as f64
    }

    /// Mid-tread quantisation to `[-2^(b-1), 2^(b-1) - 1]` steps.
    pub fn code(&self, y: f64) -> i64 {
        let half = 1i64 << (self.bits - 1);
        ((y / self.step()).round() as i64).clamp(-half, half - 1)
    }

    pub fn digitize(&self, y: f64) -> f64 {
        if self.bypass {
            return y;
        }
        self.code(y) as f64 * self.step()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvmConfig {
    pub dac_bits: u8,
    pub adc: Adc,
}

impl MvmConfig {
    /// Default analog range: four standard deviations of a random packed
    /// dot product over `cols` columns, `4 n sqrt(cols)`.
    pub fn default_full_scale(n: u8, cols: usize) -> f64 {
        4.0 * n as f64 * (cols as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_ADC_BITS).contains(&self.adc.bits) {
            return Err(Error::param(format!("ADC bits must be in 1..=6, got {}", self.adc.bits)));
        }
        if !(1..=8).contains(&self.dac_bits) {
            return Err(Error::param(format!("DAC bits must be in 1..=8, got {}", self.dac_bits)));
        }
        if !(self.adc.full_scale > 0.0) {
            return Err(Error::param("ADC full scale must be positive"));
        }
        Ok(())
    }

    /// Saturates `v` to the signed DAC range `[-2^(b-1), 2^(b-1)]`.
    pub fn dac(&self, v: i32) -> i32 {
        let lim = 1i32 << (self.dac_bits - 1);
        v.clamp(-lim, lim)
    }
}

/// One tile of 2T2R cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayState {
    rows: usize,
    cols: usize,
    g_pos: Vec<f32>,
    g_neg: Vec<f32>,
    // Programmed target and the sigma it was written with; used when noise
    // is redrawn on every access.
    ideal: Vec<i8>,
    sigma: Vec<f32>,
    writes: Vec<u32>,
}

impl ArrayState {
    pub fn new(rows: usize, cols: usize) -> Self {
        let cells = rows * cols;
        Self {
            rows,
            cols,
            g_pos: vec![0.0; cells],
            g_neg: vec![0.0; cells],
            ideal: vec![0; cells],
            sigma: vec![0.0; cells],
            writes: vec![0; cells],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn g_pos(&self, row: usize, col: usize) -> f64 {
        self.g_pos[row * self.cols + col] as f64
    }

    pub fn g_neg(&self, row: usize, col: usize) -> f64 {
        self.g_neg[row * self.cols + col] as f64
    }

    pub fn writes(&self, row: usize, col: usize) -> u32 {
        self.writes[row * self.cols + col]
    }

    pub fn max_writes(&self) -> u32 {
        self.writes.iter().copied().max().unwrap_or(0)
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row >= self.rows {
            return Err(Error::param(format!("row {row} out of range (tile has {} rows)", self.rows)));
        }
        Ok(())
    }

    /// Programs `seg` into `row` starting at `col`. Each value gets
    /// multiplicative noise at the sigma implied by `mlc_bits` and
    /// `wv_cycles`.
    #[allow(clippy::too_many_arguments)]
    pub fn store_row_segment<R: Rng + ?Sized>(
        &mut self,
        row: usize,
        col: usize,
        seg: &[i8],
        mlc_bits: u8,
        wv_cycles: u32,
        device: &DeviceModel,
        rng: &mut R,
    ) -> Result<Event> {
        self.check_row(row)?;
        if col + seg.len() > self.cols {
            return Err(Error::param(format!(
                "segment of {} values at column {col} exceeds {} columns",
                seg.len(),
                self.cols
            )));
        }
        if let Some(&v) = seg.iter().find(|&&v| v.unsigned_abs() > mlc_bits) {
            return Err(Error::param(format!("value {v} exceeds the {mlc_bits}-bit cell range")));
        }
        let sigma = device.sigma_for(mlc_bits, wv_cycles);
        let base = row * self.cols + col;
        for (k, &v) in seg.iter().enumerate() {
            let idx = base + k;
            let g = apply_noise(v.unsigned_abs() as f64, sigma, rng).max(0.0) as f32;
            if v >= 0 {
                self.g_pos[idx] = g;
                self.g_neg[idx] = 0.0;
            } else {
                self.g_pos[idx] = 0.0;
                self.g_neg[idx] = g;
            }
            self.ideal[idx] = v;
            self.sigma[idx] = sigma as f32;
            self.writes[idx] += 1 + wv_cycles;
        }
        Ok(Event::Program {
            cells: seg.len() as u64,
            wv_cycles,
            prog_energy_pj: device.profile.prog_energy_pj,
        })
    }

    fn cell<R: Rng + ?Sized>(&self, idx: usize, per_read: Option<&mut R>) -> f64 {
        match per_read {
            Some(rng) => {
                let v = self.ideal[idx];
                let g = apply_noise(v.unsigned_abs() as f64, self.sigma[idx] as f64, rng).max(0.0);
                if v >= 0 {
                    g
                } else {
                    -g
                }
            }
            None => self.g_pos[idx] as f64 - self.g_neg[idx] as f64,
        }
    }

    /// Signed cell values of `row`. With `per_read`, noise is redrawn from
    /// the programmed targets instead of using the frozen conductances.
    pub fn read_row<R: Rng + ?Sized>(&self, row: usize, mut per_read: Option<&mut R>) -> Result<(Vec<f64>, Event)> {
        self.check_row(row)?;
        let base = row * self.cols;
        let values = (0..self.cols)
            .map(|c| self.cell(base + c, per_read.as_deref_mut()))
            .collect();
        Ok((values, Event::Read { cells: self.cols as u64 }))
    }

    /// Analog dot products of `input` with rows `row_start..row_start + count`,
    /// before the ADC. `input` is zero-padded to the column count.
    pub fn analog_mvm<R: Rng + ?Sized>(
        &self,
        row_start: usize,
        count: usize,
        input: &[i32],
        cfg: &MvmConfig,
        mut per_read: Option<&mut R>,
    ) -> Result<Vec<f64>> {
        if row_start + count > self.rows {
            return Err(Error::param(format!(
                "rows {row_start}..{} exceed {} rows",
                row_start + count,
                self.rows
            )));
        }
        if input.len() > self.cols {
            return Err(Error::param(format!("input of {} exceeds {} columns", input.len(), self.cols)));
        }
        let drive: Vec<f64> = input.iter().map(|&v| cfg.dac(v) as f64).collect();
        let mut out = Vec::with_capacity(count);
        for r in row_start..row_start + count {
            let base = r * self.cols;
            let y = match per_read.as_deref_mut() {
                Some(rng) => drive
                    .iter()
                    .enumerate()
                    .map(|(c, &x)| x * self.cell(base + c, Some(&mut *rng)))
                    .sum(),
                None => {
                    let (gp, gn) = (&self.g_pos[base..base + drive.len()], &self.g_neg[base..base + drive.len()]);
                    drive
                        .iter()
                        .zip(gp.iter().zip(gn))
                        .map(|(&x, (&p, &n))| x * (p as f64 - n as f64))
                        .sum()
                }
            };
            out.push(y);
        }
        Ok(out)
    }

    /// One-tile MVM: analog dot products digitised by the ADC.
    pub fn mvm<R: Rng + ?Sized>(
        &self,
        row_start: usize,
        count: usize,
        input: &[i32],
        cfg: &MvmConfig,
        per_read: Option<&mut R>,
    ) -> Result<(Vec<f64>, Event)> {
        cfg.validate()?;
        let ys = self.analog_mvm(row_start, count, input, cfg, per_read)?;
        let event = Event::Mvm {
            tiles: 1,
            row_activations: count as u64,
            cols: self.cols as u64,
            adc_bits: cfg.adc.bits,
        };
        Ok((ys.into_iter().map(|y| cfg.adc.digitize(y)).collect(), event))
    }
}
