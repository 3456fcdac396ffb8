use std::fmt::Write as _;
use std::ops::{Add, AddAssign};
use std::path::Path;

use super::catalog::{Catalog, Component, MVM_CYCLES, PROGRAM_PULSE_CYCLES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Program,
    Read,
    Mvm,
    Adc,
    Asic,
}

impl Phase {
    pub const ALL: [Phase; 5] = [Phase::Program, Phase::Read, Phase::Mvm, Phase::Adc, Phase::Asic];

    pub fn key(self) -> &'static str {
        match self {
            Phase::Program => "program",
            Phase::Read => "read",
            Phase::Mvm => "mvm",
            Phase::Adc => "adc",
            Phase::Asic => "asic",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.key() == key)
    }
}

/// A priced hardware action.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Programming `cells` cells of one row with `1 + wv_cycles` pulses each.
    Program {
        cells: u64,
        wv_cycles: u32,
        prog_energy_pj: f64,
    },
    /// Sensing `cells` cells of one row.
    Read { cells: u64 },
    /// One MVM step over `tiles` tiles operating in parallel. `row_activations`
    /// counts activated rows summed over the tiles; `cols` is the driven
    /// column count per tile.
    Mvm {
        tiles: u64,
        row_activations: u64,
        cols: u64,
        adc_bits: u8,
    },
    /// Near-memory digital logic busy for `cycles` cycles.
    Asic { cycles: u64 },
}

impl Event {
    pub fn class(&self) -> &'static str {
        match self {
            Event::Program { .. } => "program",
            Event::Read { .. } => "read",
            Event::Mvm { .. } => "mvm",
            Event::Asic { .. } => "asic",
        }
    }

    pub fn latency_cycles(&self) -> u64 {
        match *self {
            Event::Program { wv_cycles, .. } => (1 + wv_cycles as u64) * PROGRAM_PULSE_CYCLES,
            Event::Read { .. } => 1,
            Event::Mvm { .. } => MVM_CYCLES,
            Event::Asic { cycles } => cycles,
        }
    }

    /// Energy split by (component, phase).
    pub fn energy(&self, catalog: &Catalog) -> Vec<(Component, Phase, f64)> {
        let unit = |c: Component| catalog.entry(c).unit_cycle_energy_pj();
        match *self {
            Event::Program {
                cells,
                wv_cycles,
                prog_energy_pj,
            } => vec![(
                Component::PcmArray,
                Phase::Program,
                cells as f64 * prog_energy_pj * (1 + wv_cycles as u64) as f64,
            )],
            Event::Read { cells } => vec![
                (Component::PcmArray, Phase::Read, cells as f64 * unit(Component::PcmArray)),
                (Component::ReadGen, Phase::Read, 2.0 * unit(Component::ReadGen)),
                (Component::WlDecodeDrive, Phase::Read, 2.0 * unit(Component::WlDecodeDrive)),
                (
                    Component::SenseAmp,
                    Phase::Read,
                    cells.div_ceil(4) as f64 * unit(Component::SenseAmp),
                ),
            ],
            Event::Mvm {
                tiles,
                row_activations,
                cols,
                adc_bits,
            } => {
                let (t, r, c) = (tiles as f64, row_activations as f64, cols as f64);
                vec![
                    (Component::Dac, Phase::Mvm, t * c * unit(Component::Dac)),
                    // Four source lines (two per 2T2R column) per driver.
                    (Component::SlGenDrive, Phase::Mvm, t * cols.div_ceil(2) as f64 * unit(Component::SlGenDrive)),
                    (Component::WlDecodeDrive, Phase::Mvm, 2.0 * r * unit(Component::WlDecodeDrive)),
                    (Component::PcmArray, Phase::Mvm, r * c * unit(Component::PcmArray)),
                    (Component::FlashAdc, Phase::Adc, r * catalog.adc_conversion_pj(adc_bits)),
                ]
            }
            Event::Asic { cycles } => vec![(Component::Selectors, Phase::Asic, cycles as f64 * unit(Component::Selectors))],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub program_events: u64,
    pub cells_programmed: u64,
    /// Cells times pulses; what endurance is charged against.
    pub cell_pulses: u64,
    pub reads: u64,
    pub mvms: u64,
    pub adc_conversions: u64,
    pub asic_cycles: u64,
}

impl AddAssign for EventCounts {
    fn add_assign(&mut self, o: Self) {
        self.program_events += o.program_events;
        self.cells_programmed += o.cells_programmed;
        self.cell_pulses += o.cell_pulses;
        self.reads += o.reads;
        self.mvms += o.mvms;
        self.adc_conversions += o.adc_conversions;
        self.asic_cycles += o.asic_cycles;
    }
}

/// Cumulative energy and latency. Merging is element-wise addition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostLedger {
    energy_component: [f64; 8],
    energy_phase: [f64; 5],
    latency_phase: [u64; 5],
    pub counts: EventCounts,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, ev: &Event) {
        self.record_with(ev, &Catalog::table_s3());
    }

    pub fn record_with(&mut self, ev: &Event, catalog: &Catalog) {
        for (component, phase, pj) in ev.energy(catalog) {
            self.energy_component[component.index()] += pj;
            self.energy_phase[phase as usize] += pj;
        }
        let phase = match ev {
            Event::Program { .. } => Phase::Program,
            Event::Read { .. } => Phase::Read,
            Event::Mvm { .. } => Phase::Mvm,
            Event::Asic { .. } => Phase::Asic,
        };
        self.latency_phase[phase as usize] += ev.latency_cycles();

        let c = &mut self.counts;
        match *ev {
            Event::Program { cells, wv_cycles, .. } => {
                c.program_events += 1;
                c.cells_programmed += cells;
                c.cell_pulses += cells * (1 + wv_cycles as u64);
            }
            Event::Read { .. } => c.reads += 1,
            Event::Mvm { row_activations, .. } => {
                c.mvms += 1;
                c.adc_conversions += row_activations;
            }
            Event::Asic { cycles } => c.asic_cycles += cycles,
        }
    }

    pub fn energy_pj(&self) -> f64 {
        self.energy_phase.iter().sum()
    }

    pub fn latency_cycles(&self) -> u64 {
        self.latency_phase.iter().sum()
    }

    pub fn latency_ns(&self) -> f64 {
        self.latency_cycles() as f64 * super::CYCLE_NS
    }

    pub fn component_energy_pj(&self, c: Component) -> f64 {
        self.energy_component[c.index()]
    }

    pub fn phase_energy_pj(&self, p: Phase) -> f64 {
        self.energy_phase[p as usize]
    }

    pub fn phase_latency_cycles(&self, p: Phase) -> u64 {
        self.latency_phase[p as usize]
    }

    pub fn merge(&mut self, other: &CostLedger) {
        self.energy_component
            .iter_mut()
            .zip(&other.energy_component)
            .for_each(|(a, b)| *a += b);
        self.energy_phase
            .iter_mut()
            .zip(&other.energy_phase)
            .for_each(|(a, b)| *a += b);
        self.latency_phase
            .iter_mut()
            .zip(&other.latency_phase)
            .for_each(|(a, b)| *a += b);
        self.counts += other.counts;
    }

    /// True when every field agrees within `rel_tol` (energies) and exactly
    /// (latencies and counts).
    pub fn approx_eq(&self, other: &CostLedger, rel_tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1e-12);
        self.latency_phase == other.latency_phase
            && self.counts == other.counts
            && self
                .energy_component
                .iter()
                .zip(&other.energy_component)
                .all(|(&a, &b)| close(a, b))
            && self.energy_phase.iter().zip(&other.energy_phase).all(|(&a, &b)| close(a, b))
    }

    /// Key-value text form, one `key=value` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# specpcm cost ledger\n");
        for c in Component::ALL {
            let _ = writeln!(out, "energy_pj.component.{}={}", c.key(), self.component_energy_pj(c));
        }
        for p in Phase::ALL {
            let _ = writeln!(out, "energy_pj.phase.{}={}", p.key(), self.phase_energy_pj(p));
        }
        for p in Phase::ALL {
            let _ = writeln!(out, "latency_cycles.phase.{}={}", p.key(), self.phase_latency_cycles(p));
        }
        let c = &self.counts;
        for (k, v) in [
            ("program_events", c.program_events),
            ("cells_programmed", c.cells_programmed),
            ("cell_pulses", c.cell_pulses),
            ("reads", c.reads),
            ("mvms", c.mvms),
            ("adc_conversions", c.adc_conversions),
            ("asic_cycles", c.asic_cycles),
        ] {
            let _ = writeln!(out, "count.{k}={v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut ledger = CostLedger::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let float = || value.trim().parse::<f64>().map_err(|_| err(format!("invalid number `{value}`")));
            let int = || value.trim().parse::<u64>().map_err(|_| err(format!("invalid count `{value}`")));
            let parts: Vec<&str> = key.trim().split('.').collect();
            match parts.as_slice() {
                ["energy_pj", "component", name] => {
                    let c = Component::from_key(name).ok_or_else(|| err(format!("unknown component `{name}`")))?;
                    ledger.energy_component[c.index()] = float()?;
                }
                ["energy_pj", "phase", name] => {
                    let p = Phase::from_key(name).ok_or_else(|| err(format!("unknown phase `{name}`")))?;
                    ledger.energy_phase[p as usize] = float()?;
                }
                ["latency_cycles", "phase", name] => {
                    let p = Phase::from_key(name).ok_or_else(|| err(format!("unknown phase `{name}`")))?;
                    ledger.latency_phase[p as usize] = int()?;
                }
                ["count", name] => {
                    let c = &mut ledger.counts;
                    let slot = match *name {
                        "program_events" => &mut c.program_events,
                        "cells_programmed" => &mut c.cells_programmed,
                        "cell_pulses" => &mut c.cell_pulses,
                        "reads" => &mut c.reads,
                        "mvms" => &mut c.mvms,
                        "adc_conversions" => &mut c.adc_conversions,
                        "asic_cycles" => &mut c.asic_cycles,
                        other => return Err(err(format!("unknown event class `{other}`"))),
                    };
                    *slot = int()?;
                }
                _ => return Err(err(format!("unknown ledger key `{key}`"))),
            }
        }
        Ok(ledger)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

impl Add for CostLedger {
    type Output = CostLedger;

    fn add(mut self, rhs: Self) -> Self {
        self.merge(&rhs);
        self
    }
}
