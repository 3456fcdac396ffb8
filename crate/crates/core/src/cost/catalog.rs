use std::fmt;

pub const CLOCK_MHZ: f64 = 500.0;
pub const CYCLE_NS: f64 = 1e3 / CLOCK_MHZ;
/// A full-tile in-memory MVM, including DAC input generation and ADC readout.
pub const MVM_CYCLES: u64 = 10;
/// One programming pulse.
pub const PROGRAM_PULSE_NS: f64 = 20.0;
pub const PROGRAM_PULSE_CYCLES: u64 = 10;
pub const ADC_COMPARATORS: u32 = 63;
pub const MAX_ADC_BITS: u8 = 6;
pub const TILE_ROWS: usize = 128;
pub const TILE_COLS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    PcmArray,
    FlashAdc,
    Dac,
    SlGenDrive,
    ReadGen,
    WlDecodeDrive,
    SenseAmp,
    Selectors,
}

impl Component {
    pub const ALL: [Component; 8] = [
        Component::PcmArray,
        Component::FlashAdc,
        Component::Dac,
        Component::SlGenDrive,
        Component::ReadGen,
        Component::WlDecodeDrive,
        Component::SenseAmp,
        Component::Selectors,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Component::PcmArray => "pcm_array",
            Component::FlashAdc => "flash_adc",
            Component::Dac => "dac",
            Component::SlGenDrive => "sl_gen_drive",
            Component::ReadGen => "read_gen",
            Component::WlDecodeDrive => "wl_decode_drive",
            Component::SenseAmp => "sense_amp",
            Component::Selectors => "selectors",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.key() == key)
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Per-tile power and area of one peripheral class at 40 nm.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub component: Component,
    /// `None` where only the aggregate figure was measured.
    pub unit_power_uw: Option<f64>,
    pub unit_area_um2: Option<f64>,
    pub units_per_tile: u32,
    pub total_power_mw: f64,
    pub total_area_mm2: f64,
}

impl CatalogEntry {
    /// Unit power, falling back to the aggregate spread over the units.
    pub fn effective_unit_power_uw(&self) -> f64 {
        self.unit_power_uw
            .unwrap_or(self.total_power_mw * 1e3 / self.units_per_tile as f64)
    }

    pub fn effective_unit_area_um2(&self) -> f64 {
        self.unit_area_um2
            .unwrap_or(self.total_area_mm2 * 1e6 / self.units_per_tile as f64)
    }

    /// Energy of one unit active for one clock cycle.
    pub fn unit_cycle_energy_pj(&self) -> f64 {
        // uW * ns = fJ
        self.effective_unit_power_uw() * CYCLE_NS * 1e-3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::table_s3()
    }
}

impl Catalog {
    /// Measured component figures for one 128x128 tile and its periphery.
    pub fn table_s3() -> Self {
        let e = |component, unit_power_uw, unit_area_um2, units_per_tile, total_power_mw, total_area_mm2| CatalogEntry {
            component,
            unit_power_uw,
            unit_area_um2,
            units_per_tile,
            total_power_mw,
            total_area_mm2,
        };
        use Component::*;
        Self {
            entries: vec![
                // One unit per 2T2R cell.
                e(PcmArray, Some(0.22), Some(0.5), 128 * 128, 3.58, 0.0082),
                // Each shared by eight rows.
                e(FlashAdc, Some(320.0), Some(920.0), 16, 5.12, 0.0147),
                // One per column.
                e(Dac, Some(6.56), Some(32.0), 128, 0.84, 0.0041),
                // Each shared by four columns.
                e(SlGenDrive, Some(52.5), Some(72.47), 64, 3.36, 0.0046),
                // Two per row.
                e(ReadGen, None, None, 256, 0.51, 0.0018),
                // Two drivers per row behind an 8-bit decoder.
                e(WlDecodeDrive, Some(4.05), Some(10.68), 256, 1.04, 0.0027),
                // Each shared by four columns.
                e(SenseAmp, Some(20.0), Some(75.9), 32, 0.64, 0.0024),
                e(Selectors, None, None, 1, 0.50, 0.0017),
            ],
        }
    }

    pub fn entry(&self, c: Component) -> &CatalogEntry {
        &self.entries[c.index()]
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn total_power_mw(&self) -> f64 {
        self.entries.iter().map(|e| e.total_power_mw).sum()
    }

    pub fn total_area_mm2(&self) -> f64 {
        self.entries.iter().map(|e| e.total_area_mm2).sum()
    }

    /// Energy of one ADC conversion at `bits` effective precision: only
    /// `2^bits - 1` of the 63 comparators fire.
    pub fn adc_conversion_pj(&self, bits: u8) -> f64 {
        let enabled = (1u32 << bits) - 1;
        self.entry(Component::FlashAdc).unit_cycle_energy_pj() * enabled as f64 / ADC_COMPARATORS as f64
    }
}
