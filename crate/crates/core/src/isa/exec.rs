use std::fmt;

use rand::Rng;

use super::{Instruction, BUFFER_ARRAY};
use crate::array::MachineState;
use crate::cost::CostLedger;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub latency_cycles: u64,
    pub energy_pj: f64,
    /// READ_HV: the digitised row slice; MVM_COMPUTE: one score per row.
    pub outputs: Vec<f64>,
    pub ledger: CostLedger,
}

/// Executes one instruction, updating the machine and its ledger.
pub fn execute<R: Rng + ?Sized>(i: &Instruction, m: &mut MachineState, rng: &mut R) -> Result<StepResult> {
    let before = std::mem::take(&mut m.ledger);
    let outcome = step(i, m, rng);
    let delta = std::mem::replace(&mut m.ledger, before);
    m.ledger.merge(&delta);
    Ok(StepResult {
        latency_cycles: delta.latency_cycles(),
        energy_pj: delta.energy_pj(),
        outputs: outcome?,
        ledger: delta,
    })
}

fn step<R: Rng + ?Sized>(i: &Instruction, m: &mut MachineState, rng: &mut R) -> Result<Vec<f64>> {
    let outputs = match *i {
        Instruction::StoreHv {
            ref data,
            arr_idx,
            col_addr,
            row_addr,
            mlc_bits,
            write_cycles,
        } => {
            if arr_idx == BUFFER_ARRAY {
                let end = col_addr + data.len();
                if end > m.input_buffer.len() {
                    return Err(Error::param(format!(
                        "buffer write {col_addr}..{end} exceeds buffer of {}",
                        m.input_buffer.len()
                    )));
                }
                for (b, &v) in m.input_buffer[col_addr..end].iter_mut().zip(data) {
                    *b = v as i32;
                }
            } else {
                let device = m.config.device.clone();
                let tile = m.tile_mut(arr_idx as usize)?;
                let ev = tile.store_row_segment(row_addr, col_addr, data, mlc_bits, write_cycles, &device, rng)?;
                m.ledger.record(&ev);
            }
            Vec::new()
        }
        Instruction::ReadHv {
            data_size,
            arr_idx,
            col_addr,
            row_addr,
            mlc_bits,
        } => {
            let per_read = m.config.noise_per_read;
            let tile = m.tile(arr_idx)?;
            if col_addr + data_size > tile.cols() {
                return Err(Error::param(format!(
                    "read of {data_size} values at column {col_addr} exceeds {} columns",
                    tile.cols()
                )));
            }
            let (row, ev) = tile.read_row(row_addr, per_read.then_some(&mut *rng))?;
            // Sense amplifiers resolve each cell to the nearest stored level.
            let bound = mlc_bits as f64;
            let levels: Vec<f64> = row[col_addr..col_addr + data_size]
                .iter()
                .map(|v| v.round().clamp(-bound, bound))
                .collect();
            let l = *m.layout();
            let offset = l.stripe_of(arr_idx) * l.cols + col_addr;
            for (b, &v) in m.input_buffer[offset..offset + data_size].iter_mut().zip(&levels) {
                *b = v as i32;
            }
            m.ledger.record(&ev);
            levels
        }
        Instruction::MvmCompute {
            row_addr,
            num_activated_row,
            adc_bits,
            mlc_bits,
        } => m.mvm_rows(row_addr, num_activated_row, adc_bits, mlc_bits, rng)?,
    };
    Ok(outputs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub index: usize,
    pub opcode: &'static str,
    pub latency_cycles: u64,
    pub energy_pj: f64,
    pub cumulative_cycles: u64,
    pub outputs: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    /// Cost of this run alone.
    pub ledger: CostLedger,
}

impl Trace {
    pub fn total_cycles(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.cumulative_cycles)
    }
}

/// A run stopped by a trap; `trace` holds the completed instructions.
#[derive(Debug)]
pub struct Aborted {
    pub trace: Trace,
    pub error: Error,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Aborted {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Aborted> for Error {
    fn from(a: Aborted) -> Self {
        a.error
    }
}

/// Runs `program` in order; the first failing instruction traps.
pub fn run<R: Rng + ?Sized>(program: &[Instruction], m: &mut MachineState, rng: &mut R) -> Result<Trace, Aborted> {
    let mut trace = Trace::default();
    let mut cycles = 0;
    for (index, ins) in program.iter().enumerate() {
        match execute(ins, m, rng) {
            Ok(step) => {
                cycles += step.latency_cycles;
                trace.ledger.merge(&step.ledger);
                trace.entries.push(TraceEntry {
                    index,
                    opcode: ins.opcode(),
                    latency_cycles: step.latency_cycles,
                    energy_pj: step.energy_pj,
                    cumulative_cycles: cycles,
                    outputs: step.outputs,
                });
            }
            Err(e) => {
                return Err(Aborted {
                    trace,
                    error: Error::Trap {
                        index,
                        msg: e.to_string(),
                    },
                });
            }
        }
    }
    Ok(trace)
}

/// `index,opcode,latency_cycles,energy_pj,outputs` with outputs joined by `;`.
pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("index,opcode,latency_cycles,energy_pj,outputs\n");
    for e in &trace.entries {
        let outputs: Vec<String> = e.outputs.iter().map(f64::to_string).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.index,
            e.opcode,
            e.latency_cycles,
            e.energy_pj,
            outputs.join(";")
        ));
    }
    out
}
