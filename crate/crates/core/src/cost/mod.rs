//! Energy, latency and area accounting.
//!
//! Hardware operations emit [`Event`]s into a [`CostLedger`]; the ledger
//! prices them against the component [`Catalog`] and can be rendered as a
//! [`CostReport`] or an [`AreaReport`].

mod catalog;
mod ledger;
mod report;

pub use catalog::{
    Catalog, CatalogEntry, Component, ADC_COMPARATORS, CLOCK_MHZ, CYCLE_NS, MAX_ADC_BITS, MVM_CYCLES,
    PROGRAM_PULSE_CYCLES, PROGRAM_PULSE_NS, TILE_COLS, TILE_ROWS,
};
pub use ledger::{CostLedger, Event, EventCounts, Phase};
pub use report::{area_report, published_baselines, AreaLine, AreaReport, BaselineRow, CostReport, PUBLISHED_ENERGY_J};
