//! Database search: references are programmed once into a striped bank,
//! each query is scored against every row with one MVM, and the best
//! matches are filtered by target-decoy FDR.

mod fdr;

pub use fdr::{fdr_filter, FdrOutcome};

use std::collections::{BTreeSet, HashSet};

use rand::Rng;

use crate::array::{MachineLayout, MachineState};
use crate::cluster::store_row;
use crate::config::{Config, Workload};
use crate::cost::{CostLedger, CYCLE_NS, MVM_CYCLES};
use crate::encoder::Encoder;
use crate::error::{Error, Result};
use crate::hdc::PackedHv;
use crate::isa::{run, Instruction, BUFFER_ARRAY};
use crate::rng;
use crate::spectra::Spectrum;

/// One reference to program into the bank.
#[derive(Debug, Clone, PartialEq)]
pub struct BankEntry {
    pub id: String,
    pub hv: PackedHv,
    pub is_decoy: bool,
    /// Peptide label, used when counting unique identifications.
    pub label: Option<String>,
    pub precursor_mz: f64,
}

/// References resident in a machine, one logical row each, in input order.
#[derive(Debug, Clone)]
pub struct ReferenceBank {
    entries: Vec<BankEntry>,
    machine: MachineState,
    adc_bits: u8,
    /// One-time cost of programming the references.
    pub program_ledger: CostLedger,
}

/// Programs `refs` with `write_cycles` write-verify cycles each.
pub fn build_reference_bank<R: Rng + ?Sized>(
    refs: Vec<BankEntry>,
    cfg: &Config,
    write_cycles: u32,
    rng: &mut R,
) -> Result<ReferenceBank> {
    let first = refs.first().ok_or_else(|| Error::param("reference bank is empty"))?;
    let (len, n) = (first.hv.len(), first.hv.n());
    let mut seen = HashSet::new();
    for r in &refs {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
        if r.hv.len() != len || r.hv.n() != n {
            return Err(Error::param(format!("reference `{}` has a different shape", r.id)));
        }
    }
    let layout = MachineLayout::for_vectors(len, refs.len(), cfg.array_rows, cfg.array_cols);
    let mut machine = MachineState::new(layout, cfg.machine_config(Workload::Search), cfg.num_arrays)?;
    let program: Vec<Instruction> = refs
        .iter()
        .enumerate()
        .flat_map(|(row, r)| store_row(&r.hv, row, &layout, write_cycles))
        .collect();
    run(&program, &mut machine, rng)?;
    let program_ledger = std::mem::take(&mut machine.ledger);
    Ok(ReferenceBank {
        entries: refs,
        machine,
        adc_bits: cfg.adc_bits,
        program_ledger,
    })
}

impl ReferenceBank {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn layout(&self) -> &MachineLayout {
        self.machine.layout()
    }

    /// Cost of all queries so far.
    pub fn query_ledger(&self) -> &CostLedger {
        &self.machine.ledger
    }

    /// Latency of one query: the MVM plus the partial-sum adder tree.
    pub fn query_latency_ns(&self) -> f64 {
        (MVM_CYCLES + self.layout().accumulation_cycles()) as f64 * CYCLE_NS
    }

    /// Loads `query` into the input buffer stripe by stripe, then scores it
    /// against every reference row.
    pub fn query_program(&self, query: &PackedHv) -> Result<Vec<Instruction>> {
        let l = self.layout();
        if query.len().div_ceil(l.cols) != l.stripes || query.n() != self.entries[0].hv.n() {
            return Err(Error::param("query shape does not match the bank"));
        }
        let mut prog: Vec<Instruction> = query
            .elems()
            .chunks(l.cols)
            .enumerate()
            .map(|(stripe, seg)| Instruction::StoreHv {
                data: seg.to_vec(),
                arr_idx: BUFFER_ARRAY,
                col_addr: stripe * l.cols,
                row_addr: 0,
                mlc_bits: query.n(),
                write_cycles: 0,
            })
            .collect();
        prog.push(Instruction::MvmCompute {
            row_addr: 0,
            num_activated_row: self.len(),
            adc_bits: self.adc_bits,
            mlc_bits: query.n(),
        });
        Ok(prog)
    }

    /// Similarity of `query` to every reference, in bank order.
    pub fn scores<R: Rng + ?Sized>(&mut self, query: &PackedHv, rng: &mut R) -> Result<Vec<f64>> {
        let prog = self.query_program(query)?;
        let trace = run(&prog, &mut self.machine, rng)?;
        Ok(trace.entries.last().map(|e| e.outputs.clone()).unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub query_id: String,
    /// Index of the best reference in bank order.
    pub ref_index: usize,
    pub ref_id: String,
    pub score: f64,
    pub is_decoy: bool,
    pub accepted: bool,
}

/// Index of the largest score among `candidates`; ties go to the smallest
/// index.
pub fn argmax(scores: &[f64], candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
    candidates.into_iter().fold(None, |best: Option<usize>, i| match best {
        Some(b) if scores[b] >= scores[i] => Some(b),
        _ => Some(i),
    })
}

/// Best match for one query. With a precursor window only references within
/// the window compete; `None` when none does.
pub fn search<R: Rng + ?Sized>(
    query_id: &str,
    query: &PackedHv,
    query_mz: f64,
    bank: &mut ReferenceBank,
    precursor_window: Option<f64>,
    rng: &mut R,
) -> Result<Option<SearchResult>> {
    let scores = bank.scores(query, rng)?;
    let entries = &bank.entries;
    let best = match precursor_window {
        Some(w) => argmax(
            &scores,
            (0..entries.len()).filter(|&i| (entries[i].precursor_mz - query_mz).abs() <= w),
        ),
        None => argmax(&scores, 0..entries.len()),
    };
    Ok(best.map(|i| SearchResult {
        query_id: query_id.to_string(),
        ref_index: i,
        ref_id: entries[i].id.clone(),
        score: scores[i],
        is_decoy: entries[i].is_decoy,
        accepted: false,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSummary {
    pub queries: usize,
    /// Accepted target matches, or distinct labels among them when counting
    /// unique peptides.
    pub identified_count: usize,
    pub fdr_threshold: Option<f64>,
    /// Query energy only; programming is in `program_energy_pj`.
    pub energy_pj: f64,
    /// All queries back to back.
    pub latency_ns: f64,
    pub per_query_latency_ns: f64,
    pub program_energy_pj: f64,
    pub program_latency_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRun {
    pub results: Vec<SearchResult>,
    pub summary: SearchSummary,
    pub program_ledger: CostLedger,
    pub query_ledger: CostLedger,
}

impl SearchRun {
    /// Both ledgers combined.
    pub fn ledger(&self) -> CostLedger {
        self.program_ledger.clone() + self.query_ledger.clone()
    }

    /// `query_id,ref_id,score,is_decoy,accepted` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["query_id", "ref_id", "score", "is_decoy", "accepted"])?;
        for r in &self.results {
            w.write_record([
                r.query_id.as_str(),
                r.ref_id.as_str(),
                &r.score.to_string(),
                &r.is_decoy.to_string(),
                &r.accepted.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::param(e.to_string()))?).expect("utf-8 csv"))
    }
}

/// Marks accepted results in place and summarises them.
pub fn apply_fdr(results: &mut [SearchResult], bank: &ReferenceBank, cfg: &Config) -> (usize, Option<f64>) {
    let scores: Vec<f64> = results.iter().map(|r| r.score).collect();
    let decoys: Vec<bool> = results.iter().map(|r| r.is_decoy).collect();
    let out = fdr_filter(&scores, &decoys, cfg.fdr);
    for (r, &a) in results.iter_mut().zip(&out.accepted) {
        r.accepted = a;
    }
    let accepted = results.iter().filter(|r| r.accepted);
    let count = if cfg.unique_peptides {
        accepted
            .map(|r| {
                let e = &bank.entries()[r.ref_index];
                e.label.as_deref().unwrap_or(&e.id)
            })
            .collect::<BTreeSet<_>>()
            .len()
    } else {
        accepted.count()
    };
    (count, out.threshold)
}

/// Encodes `refs` and `queries`, programs the bank, searches every query
/// and applies the FDR filter.
pub fn search_spectra(queries: &[Spectrum], refs: &[Spectrum], cfg: &Config) -> Result<SearchRun> {
    cfg.validate()?;
    let encoder = Encoder::new(cfg, Workload::Search)?;
    let ref_hvs = encoder.packed_all(refs)?;
    let entries = refs
        .iter()
        .zip(ref_hvs)
        .map(|(s, hv)| BankEntry {
            id: s.id.clone(),
            hv,
            is_decoy: s.is_decoy,
            label: s.label.clone(),
            precursor_mz: s.precursor_mz,
        })
        .collect();
    let mut r = rng::for_stream(cfg.seed, 0);
    let mut bank = build_reference_bank(entries, cfg, cfg.write_cycles(Workload::Search), &mut r)?;

    let query_hvs = encoder.packed_all(queries)?;
    let mut results = Vec::with_capacity(queries.len());
    for (q, hv) in queries.iter().zip(&query_hvs) {
        if let Some(res) = search(&q.id, hv, q.precursor_mz, &mut bank, cfg.precursor_window, &mut r)? {
            results.push(res);
        }
    }
    let (identified_count, fdr_threshold) = apply_fdr(&mut results, &bank, cfg);
    let query_ledger = bank.query_ledger().clone();
    let summary = SearchSummary {
        queries: queries.len(),
        identified_count,
        fdr_threshold,
        energy_pj: query_ledger.energy_pj(),
        latency_ns: query_ledger.latency_ns(),
        per_query_latency_ns: bank.query_latency_ns(),
        program_energy_pj: bank.program_ledger.energy_pj(),
        program_latency_ns: bank.program_ledger.latency_ns(),
    };
    Ok(SearchRun {
        results,
        summary,
        program_ledger: bank.program_ledger.clone(),
        query_ledger,
    })
}
