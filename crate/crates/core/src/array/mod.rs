//! Behavioral model of the 2T2R PCM tiles and the striped machine built
//! from them.
//!
//! A signed value `v` is stored as a conductance pair: `g_pos = |v|` when
//! `v >= 0`, otherwise `g_neg = |v|`. The column-wise difference is what
//! reads and in-memory MVMs observe.

mod machine;
mod tile;

pub use machine::{MachineConfig, MachineLayout, MachineState};
pub use tile::{Adc, ArrayState, MvmConfig};
