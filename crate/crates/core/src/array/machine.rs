use rand::Rng;

use super::tile::{Adc, ArrayState, MvmConfig};
use crate::cost::{CostLedger, Event};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::hdc::PackedHv;

/// Tile grid: a packed vector is striped over `stripes` tiles along its
/// columns, and logical rows are grouped 128 (`rows`) to a tile.
///
/// Tile `arr_idx = row_group * stripes + stripe` holds columns
/// `stripe * cols ..` of logical rows `row_group * rows ..`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineLayout {
    pub rows: usize,
    pub cols: usize,
    pub stripes: usize,
    pub row_groups: usize,
}

impl MachineLayout {
    /// Smallest layout holding `vectors` packed vectors of `packed_len` values.
    pub fn for_vectors(packed_len: usize, vectors: usize, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            stripes: packed_len.div_ceil(cols).max(1),
            row_groups: vectors.div_ceil(rows).max(1),
        }
    }

    pub fn tiles(&self) -> usize {
        self.stripes * self.row_groups
    }

    pub fn logical_rows(&self) -> usize {
        self.row_groups * self.rows
    }

    pub fn buffer_len(&self) -> usize {
        self.stripes * self.cols
    }

    pub fn tile_index(&self, row_group: usize, stripe: usize) -> usize {
        row_group * self.stripes + stripe
    }

    pub fn stripe_of(&self, arr_idx: usize) -> usize {
        arr_idx % self.stripes
    }

    /// Cycles for the tree adder combining one partial sum per stripe.
    pub fn accumulation_cycles(&self) -> u64 {
        (usize::BITS - (self.stripes - 1).leading_zeros()) as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineConfig {
    pub device: DeviceModel,
    pub dac_bits: u8,
    /// `None` selects [`MvmConfig::default_full_scale`] for the active MLC bits.
    pub adc_full_scale: Option<f64>,
    pub adc_bypass: bool,
    /// Redraw programming noise on every access instead of freezing it.
    pub noise_per_read: bool,
}

impl MachineConfig {
    pub fn new(device: DeviceModel) -> Self {
        Self {
            device,
            dac_bits: 3,
            adc_full_scale: None,
            adc_bypass: false,
            noise_per_read: false,
        }
    }

    pub fn mvm_config(&self, adc_bits: u8, mlc_bits: u8, cols: usize) -> MvmConfig {
        MvmConfig {
            dac_bits: self.dac_bits,
            adc: Adc {
                bits: adc_bits,
                full_scale: self
                    .adc_full_scale
                    .unwrap_or_else(|| MvmConfig::default_full_scale(mlc_bits, cols)),
                bypass: self.adc_bypass,
            },
        }
    }
}

/// All tiles of one execution plus the staging buffers and the ledger.
#[derive(Debug, Clone)]
pub struct MachineState {
    layout: MachineLayout,
    pub config: MachineConfig,
    tiles: Vec<ArrayState>,
    pub input_buffer: Vec<i32>,
    pub output_buffer: Vec<f64>,
    pub ledger: CostLedger,
}

impl MachineState {
    /// Fails with a capacity error when the layout needs more than
    /// `max_arrays` tiles.
    pub fn new(layout: MachineLayout, config: MachineConfig, max_arrays: usize) -> Result<Self> {
        if layout.rows == 0 || layout.cols == 0 || layout.stripes == 0 || layout.row_groups == 0 {
            return Err(Error::param("machine layout dimensions must be positive"));
        }
        if layout.tiles() > max_arrays {
            return Err(Error::Capacity {
                required: layout.tiles(),
                available: max_arrays,
            });
        }
        Ok(Self {
            tiles: (0..layout.tiles())
                .map(|_| ArrayState::new(layout.rows, layout.cols))
                .collect(),
            input_buffer: vec![0; layout.buffer_len()],
            output_buffer: Vec::new(),
            ledger: CostLedger::new(),
            layout,
            config,
        })
    }

    pub fn layout(&self) -> &MachineLayout {
        &self.layout
    }

    pub fn tile(&self, arr_idx: usize) -> Result<&ArrayState> {
        self.tiles
            .get(arr_idx)
            .ok_or_else(|| Error::param(format!("array index {arr_idx} out of range ({} tiles)", self.tiles.len())))
    }

    pub(crate) fn tile_mut(&mut self, arr_idx: usize) -> Result<&mut ArrayState> {
        let n = self.tiles.len();
        self.tiles
            .get_mut(arr_idx)
            .ok_or_else(|| Error::param(format!("array index {arr_idx} out of range ({n} tiles)")))
    }

    pub fn max_writes_per_cell(&self) -> u32 {
        self.tiles.iter().map(ArrayState::max_writes).max().unwrap_or(0)
    }

    /// Copies `v` into the input buffer, zero-padding the tail.
    pub fn load_input(&mut self, v: &PackedHv) -> Result<()> {
        if v.len() > self.input_buffer.len() {
            return Err(Error::param(format!(
                "input of {} values exceeds buffer of {}",
                v.len(),
                self.input_buffer.len()
            )));
        }
        self.input_buffer.fill(0);
        for (b, &e) in self.input_buffer.iter_mut().zip(v.elems()) {
            *b = e as i32;
        }
        Ok(())
    }

    /// MVM of the input buffer against logical rows `row_addr..row_addr + count`.
    ///
    /// Every stripe tile of the touched row groups computes its partial sums
    /// in parallel; the digitised partial sums of one logical row are then
    /// added by the near-memory tree adder. Returns one score per row and
    /// leaves it in the output buffer.
    pub fn mvm_rows<R: Rng + ?Sized>(
        &mut self,
        row_addr: usize,
        count: usize,
        adc_bits: u8,
        mlc_bits: u8,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let l = self.layout;
        if count == 0 || row_addr + count > l.logical_rows() {
            return Err(Error::param(format!(
                "rows {row_addr}..{} outside the {} logical rows",
                row_addr + count,
                l.logical_rows()
            )));
        }
        let cfg = self.config.mvm_config(adc_bits, mlc_bits, l.cols);
        cfg.validate()?;
        let per_read = self.config.noise_per_read;

        let mut scores = vec![0.0; count];
        let mut tiles_used = 0u64;
        let mut row = row_addr;
        while row < row_addr + count {
            let group = row / l.rows;
            let local = row % l.rows;
            let n = (l.rows - local).min(row_addr + count - row);
            for stripe in 0..l.stripes {
                let input = &self.input_buffer[stripe * l.cols..(stripe + 1) * l.cols];
                let tile = &self.tiles[l.tile_index(group, stripe)];
                let ys = tile.analog_mvm(local, n, input, &cfg, per_read.then_some(&mut *rng))?;
                for (s, y) in scores[row - row_addr..].iter_mut().zip(ys) {
                    *s += cfg.adc.digitize(y);
                }
                tiles_used += 1;
            }
            row += n;
        }

        self.ledger.record(&Event::Mvm {
            tiles: tiles_used,
            row_activations: count as u64 * l.stripes as u64,
            cols: l.cols as u64,
            adc_bits,
        });
        let acc = l.accumulation_cycles();
        if acc > 0 {
            self.ledger.record(&Event::Asic { cycles: acc });
        }
        self.output_buffer.clone_from(&scores);
        Ok(scores)
    }

    /// Loads `input` and scores it against logical rows `rows`.
    pub fn mvm_full<R: Rng + ?Sized>(
        &mut self,
        input: &PackedHv,
        rows: std::ops::Range<usize>,
        adc_bits: u8,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if input.len().div_ceil(self.layout.cols) != self.layout.stripes {
            return Err(Error::param(format!(
                "input of {} packed values does not match {} stripes",
                input.len(),
                self.layout.stripes
            )));
        }
        self.load_input(input)?;
        self.mvm_rows(rows.start, rows.len(), adc_bits, input.n(), rng)
    }

    /// Programs `v` into logical row `row`, one segment per stripe.
    pub fn store_vector<R: Rng + ?Sized>(&mut self, row: usize, v: &PackedHv, wv_cycles: u32, rng: &mut R) -> Result<()> {
        let l = self.layout;
        if row >= l.logical_rows() {
            return Err(Error::param(format!("row {row} outside the {} logical rows", l.logical_rows())));
        }
        for (stripe, seg) in v.elems().chunks(l.cols).enumerate() {
            let idx = l.tile_index(row / l.rows, stripe);
            let device = self.config.device.clone();
            let ev = self.tile_mut(idx)?.store_row_segment(row % l.rows, 0, seg, v.n(), wv_cycles, &device, rng)?;
            self.ledger.record(&ev);
        }
        Ok(())
    }
}
