use std::fmt;

use super::catalog::{Catalog, Component, CYCLE_NS};
use super::ledger::{CostLedger, Phase};

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub energy_pj: f64,
    pub latency_cycles: u64,
    pub by_phase: Vec<(Phase, f64, u64)>,
    pub by_component: Vec<(Component, f64)>,
    /// Tiles available for parallel work; carried for context only.
    pub num_arrays: usize,
}

impl CostReport {
    pub fn from_ledger(ledger: &CostLedger, num_arrays: usize) -> Self {
        Self {
            energy_pj: ledger.energy_pj(),
            latency_cycles: ledger.latency_cycles(),
            by_phase: Phase::ALL
                .iter()
                .map(|&p| (p, ledger.phase_energy_pj(p), ledger.phase_latency_cycles(p)))
                .collect(),
            by_component: Component::ALL
                .iter()
                .map(|&c| (c, ledger.component_energy_pj(c)))
                .collect(),
            num_arrays,
        }
    }

    pub fn energy_j(&self) -> f64 {
        self.energy_pj * 1e-12
    }

    pub fn latency_ns(&self) -> f64 {
        self.latency_cycles as f64 * CYCLE_NS
    }

    pub fn latency_s(&self) -> f64 {
        self.latency_ns() * 1e-9
    }

    /// `section,item,energy_pj,latency_cycles` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,item,energy_pj,latency_cycles\n");
        out.push_str(&format!("total,all,{},{}\n", self.energy_pj, self.latency_cycles));
        for (p, e, l) in &self.by_phase {
            out.push_str(&format!("phase,{},{},{}\n", p.key(), e, l));
        }
        for (c, e) in &self.by_component {
            out.push_str(&format!("component,{},{},\n", c.key(), e));
        }
        out
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "energy    {:.6e} J ({:.3} pJ)", self.energy_j(), self.energy_pj)?;
        writeln!(
            f,
            "latency   {:.6e} s ({} cycles @ {} ns)",
            self.latency_s(),
            self.latency_cycles,
            CYCLE_NS
        )?;
        writeln!(f, "arrays    {}", self.num_arrays)?;
        writeln!(f, "by phase:")?;
        for (p, e, l) in &self.by_phase {
            writeln!(f, "  {:<16} {:>16.3} pJ {:>12} cycles", p.key(), e, l)?;
        }
        writeln!(f, "by component:")?;
        for (c, e) in &self.by_component {
            writeln!(f, "  {:<16} {:>16.3} pJ", c.key(), e)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaLine {
    pub component: Component,
    pub units: u64,
    pub area_mm2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaReport {
    pub tiles: usize,
    pub lines: Vec<AreaLine>,
}

impl AreaReport {
    pub fn total_mm2(&self) -> f64 {
        self.lines.iter().map(|l| l.area_mm2).sum()
    }

    pub fn share(&self, c: Component) -> f64 {
        self.lines
            .iter()
            .find(|l| l.component == c)
            .map_or(0.0, |l| l.area_mm2 / self.total_mm2())
    }
}

/// Area of `tiles` tiles with their periphery, from unit areas and unit
/// counts.
pub fn area_report(tiles: usize, catalog: &Catalog) -> AreaReport {
    AreaReport {
        tiles,
        lines: catalog
            .entries()
            .iter()
            .map(|e| {
                let units = e.units_per_tile as u64 * tiles as u64;
                AreaLine {
                    component: e.component,
                    units,
                    area_mm2: units as f64 * e.effective_unit_area_um2() * 1e-6,
                }
            })
            .collect(),
    }
}

/// Published reference latency; these are quoted figures, not simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub task: &'static str,
    pub dataset: &'static str,
    pub tool: &'static str,
    pub hardware: &'static str,
    pub latency_s: f64,
}

pub fn published_baselines() -> Vec<BaselineRow> {
    let r = |task, dataset, tool, hardware, latency_s| BaselineRow {
        task,
        dataset,
        tool,
        hardware,
        latency_s,
    };
    vec![
        r("clustering", "PXD001468", "Falcon", "CPU", 573.0),
        r("clustering", "PXD001468", "msCRUSH", "CPU", 358.0),
        r("clustering", "PXD001468", "HyperSpec", "GPU", 38.0),
        r("clustering", "PXD001468", "SpecHD", "FPGA", 13.17),
        r("clustering", "PXD001468", "SpecPCM", "TSMC 40nm", 5.46),
        r("clustering", "PXD000561", "Falcon", "CPU", 134.0 * 60.0),
        r("clustering", "PXD000561", "msCRUSH", "CPU", 42.0 * 60.0),
        r("clustering", "PXD000561", "HyperSpec", "GPU", 17.0 * 60.0),
        r("clustering", "PXD000561", "SpecHD", "FPGA", 179.0),
        r("clustering", "PXD000561", "SpecPCM", "TSMC 40nm", 98.4),
        r("db_search", "iPRG2012", "ANN-SoLo", "CPU-GPU", 6.45),
        r("db_search", "iPRG2012", "HyperOMS", "GPU", 2.08),
        r("db_search", "iPRG2012", "RRAM", "130nm", 1.22),
        r("db_search", "iPRG2012", "3D NAND", "ASAP 7nm", 0.145),
        r("db_search", "iPRG2012", "SpecPCM", "TSMC 40nm", 0.049),
        r("db_search", "HEK293", "ANN-SoLo", "CPU-GPU", 45.14),
        r("db_search", "HEK293", "HyperOMS", "GPU", 10.4),
        r("db_search", "HEK293", "SpecPCM", "TSMC 40nm", 0.316),
    ]
}

/// Published end-to-end energy figures (joules) for the large datasets.
pub const PUBLISHED_ENERGY_J: [(&str, f64); 2] = [("clustering", 3.27), ("db_search", 0.149)];
