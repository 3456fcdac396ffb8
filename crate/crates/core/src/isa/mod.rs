//! The control ISA: `STORE_HV`, `READ_HV` and `MVM_COMPUTE`.
//!
//! Programs are plain text, one instruction per line:
//!
//! ```text
//! # program a row, copy it to the input buffer, then score all rows
//! STORE_HV data=3,-1,1 arr_idx=0 col_addr=0 row_addr=5 MLC_bits=3 write_cycles=3
//! READ_HV data_size=3 arr_idx=0 col_addr=0 row_addr=5 MLC_bits=3
//! MVM_COMPUTE row_addr=0 num_activated_row=128 ADC_bits=6 MLC_bits=3
//! ```
//!
//! `data=` takes inline comma-separated integers or `@path#row`, which names
//! row `row` (0-based) of a file of comma-separated rows.
//!
//! `MVM_COMPUTE` has no data operand: it drives the input buffer, filled
//! either by `READ_HV` (each stripe tile's slice lands at its stripe offset)
//! or by `STORE_HV` with `arr_idx=-1`, which writes the buffer directly at
//! `col_addr`.

mod exec;
mod parse;

pub use exec::{execute, run, trace_csv, Aborted, StepResult, Trace, TraceEntry};
pub use parse::{parse_program, parse_program_file, render_program};

use std::fmt;

/// `arr_idx` value addressing the input staging buffer.
pub const BUFFER_ARRAY: i64 = -1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    StoreHv {
        data: Vec<i8>,
        arr_idx: i64,
        col_addr: usize,
        row_addr: usize,
        mlc_bits: u8,
        write_cycles: u32,
    },
    ReadHv {
        data_size: usize,
        arr_idx: usize,
        col_addr: usize,
        row_addr: usize,
        mlc_bits: u8,
    },
    MvmCompute {
        row_addr: usize,
        num_activated_row: usize,
        adc_bits: u8,
        mlc_bits: u8,
    },
}

impl Instruction {
    pub fn opcode(&self) -> &'static str {
        match self {
            Instruction::StoreHv { .. } => "STORE_HV",
            Instruction::ReadHv { .. } => "READ_HV",
            Instruction::MvmCompute { .. } => "MVM_COMPUTE",
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::StoreHv {
                data,
                arr_idx,
                col_addr,
                row_addr,
                mlc_bits,
                write_cycles,
            } => {
                let data: Vec<String> = data.iter().map(i8::to_string).collect();
                write!(
                    f,
                    "STORE_HV data={} arr_idx={arr_idx} col_addr={col_addr} row_addr={row_addr} MLC_bits={mlc_bits} write_cycles={write_cycles}",
                    data.join(",")
                )
            }
            Instruction::ReadHv {
                data_size,
                arr_idx,
                col_addr,
                row_addr,
                mlc_bits,
            } => write!(
                f,
                "READ_HV data_size={data_size} arr_idx={arr_idx} col_addr={col_addr} row_addr={row_addr} MLC_bits={mlc_bits}"
            ),
            Instruction::MvmCompute {
                row_addr,
                num_activated_row,
                adc_bits,
                mlc_bits,
            } => write!(
                f,
                "MVM_COMPUTE row_addr={row_addr} num_activated_row={num_activated_row} ADC_bits={adc_bits} MLC_bits={mlc_bits}"
            ),
        }
    }
}
