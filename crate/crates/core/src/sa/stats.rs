use serde::{Deserialize, Serialize};

use super::Grid;

/// Bit flips per signal class, summed over the whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToggleCounts {
    pub accumulator: u64,
    /// MAC multiplicand, mask and control registers.
    pub datapath: u64,
    /// Inter-MAC propagation registers.
    pub pipeline: u64,
    /// Edge converter hold registers.
    pub p2s: u64,
}

impl ToggleCounts {
    pub fn total(&self) -> u64 {
        self.accumulator + self.datapath + self.pipeline + self.p2s
    }
}

/// What one MAC observed during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacActivity {
    pub enabled_cycles: u64,
    pub first_enabled: Option<u64>,
    pub last_enabled: Option<u64>,
    pub first_edge: Option<u64>,
    pub first_mul: Option<u64>,
    pub edges: u64,
    pub muls: u64,
    /// Accumulator plus datapath bit flips.
    pub toggles: u64,
}

impl MacActivity {
    /// Cycles between the first multiplicand boundary and the first
    /// multiplier bit.
    pub fn lead(&self) -> Option<u64> {
        Some(self.first_mul? - self.first_edge?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStats {
    pub fill_cycles: u64,
    pub compute_cycles: u64,
    pub readout_cycles: u64,
    pub total_cycles: u64,
    pub toggles: ToggleCounts,
    #[serde(skip)]
    pub activity: Grid<MacActivity>,
}

impl CycleStats {
    pub fn is_consistent(&self) -> bool {
        self.total_cycles == self.fill_cycles + self.compute_cycles + self.readout_cycles
    }
}
