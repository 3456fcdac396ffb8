//! Lowering of one bucket's clustering work to ISA programs.

use rand::Rng;

use super::linkage::{ClusterAssignment, DistanceMatrix};
use crate::array::{MachineLayout, MachineState};
use crate::error::{Error, Result};
use crate::hdc::{pack, BipolarHv, PackedHv};
use crate::isa::{run, Instruction, Trace};

/// Knobs the generated programs expose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoweringParams {
    pub adc_bits: u8,
    pub write_cycles: u32,
}

fn check_uniform(hvs: &[PackedHv]) -> Result<(usize, u8)> {
    let first = hvs.first().ok_or_else(|| Error::param("no vectors to cluster"))?;
    let (len, n) = (first.len(), first.n());
    if let Some(bad) = hvs.iter().position(|h| h.len() != len || h.n() != n) {
        return Err(Error::param(format!(
            "vector {bad} has shape {}x{}, expected {len}x{n}",
            hvs[bad].len(),
            hvs[bad].n()
        )));
    }
    Ok((len, n))
}

/// `STORE_HV` of `v` into logical row `row`, one instruction per stripe.
pub fn store_row(v: &PackedHv, row: usize, layout: &MachineLayout, write_cycles: u32) -> Vec<Instruction> {
    v.elems()
        .chunks(layout.cols)
        .enumerate()
        .map(|(stripe, seg)| Instruction::StoreHv {
            data: seg.to_vec(),
            arr_idx: layout.tile_index(row / layout.rows, stripe) as i64,
            col_addr: 0,
            row_addr: row % layout.rows,
            mlc_bits: v.n(),
            write_cycles,
        })
        .collect()
}

/// Stores every vector (vector `i` in logical row `i`), then for each row
/// reads it back into the input buffer and scores it against all rows with
/// one `MVM_COMPUTE`. The `i`-th `MVM_COMPUTE` output is row `i` of the
/// score matrix.
pub fn distance_program(hvs: &[PackedHv], layout: &MachineLayout, p: LoweringParams) -> Result<Vec<Instruction>> {
    let (len, n) = check_uniform(hvs)?;
    if len.div_ceil(layout.cols) != layout.stripes || hvs.len() > layout.logical_rows() {
        return Err(Error::param("machine layout does not fit the vectors"));
    }
    let mut prog = Vec::new();
    for (row, v) in hvs.iter().enumerate() {
        prog.extend(store_row(v, row, layout, p.write_cycles));
    }
    for row in 0..hvs.len() {
        for stripe in 0..layout.stripes {
            prog.push(Instruction::ReadHv {
                data_size: (len - stripe * layout.cols).min(layout.cols),
                arr_idx: layout.tile_index(row / layout.rows, stripe),
                col_addr: 0,
                row_addr: row % layout.rows,
                mlc_bits: n,
            });
        }
        prog.push(Instruction::MvmCompute {
            row_addr: 0,
            num_activated_row: hvs.len(),
            adc_bits: p.adc_bits,
            mlc_bits: n,
        });
    }
    Ok(prog)
}

/// Maps a similarity score to a distance: `D` goes to 0, `-D` to 1.
pub fn score_to_distance(score: f64, dim: usize) -> f64 {
    let d = dim as f64;
    ((d - score) / (2.0 * d)).clamp(0.0, 1.0)
}

/// Reads the score matrix out of a trace of [`distance_program`]; the
/// upper triangle comes from the row-`i` scores.
pub fn distance_matrix_from_trace(trace: &Trace, n: usize, dim: usize) -> Result<DistanceMatrix> {
    let rows: Vec<&[f64]> = trace
        .entries
        .iter()
        .filter(|e| e.opcode == "MVM_COMPUTE")
        .map(|e| e.outputs.as_slice())
        .collect();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::param(format!("trace does not hold an {n}x{n} score matrix")));
    }
    DistanceMatrix::from_fn(n, |i, j| score_to_distance(rows[i][j], dim))
}

/// Runs [`distance_program`] on `m` and returns the distance matrix.
pub fn build_distance_matrix<R: Rng + ?Sized>(
    hvs: &[PackedHv],
    m: &mut MachineState,
    p: LoweringParams,
    rng: &mut R,
) -> Result<DistanceMatrix> {
    let prog = distance_program(hvs, m.layout(), p)?;
    let trace = run(&prog, m, rng)?;
    distance_matrix_from_trace(&trace, hvs.len(), hvs[0].dim())
}

/// After each merge, the bundled representative of the merged cluster is
/// written to the surviving cluster's row.
pub fn writeback_program(
    assignment: &ClusterAssignment,
    members: &[BipolarHv],
    n: u8,
    layout: &MachineLayout,
    write_cycles: u32,
) -> Result<Vec<Instruction>> {
    let mut groups: Vec<Vec<usize>> = (0..members.len()).map(|i| vec![i]).collect();
    let mut prog = Vec::new();
    for m in &assignment.merge_log {
        let moved = std::mem::take(&mut groups[m.b]);
        groups[m.a].extend(moved);
        let centroid = BipolarHv::bundle(groups[m.a].iter().map(|&i| &members[i]))?;
        prog.extend(store_row(&pack(&centroid, n)?, m.a, layout, write_cycles));
    }
    Ok(prog)
}
