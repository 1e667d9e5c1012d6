//! Bit-serial systolic array.
//!
//! Multiplicands (columns of `B`) enter at the top edge through MSb-first
//! converters and move down one row per cycle; multipliers (rows of `A`)
//! enter at the left edge through LSb-first converters and move right one
//! column per cycle. Each stream carries its enable, and the vertical stream
//! also carries the value toggle, so every MAC sees a self-consistent local
//! protocol. Results leave through a snake-ordered readout chain.
//!
//! Topologies are written `cols x rows` in reports (`16x4` has 4 rows of 16
//! MACs); internally everything is `(row, col)`.

mod array;
mod matrix;
mod readout;
mod schedule;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use array::{MatmulRun, ProbeRecord, SaStep, SystolicArray};
pub use matrix::{oracle_matmul, Grid, Matrix};
pub use readout::{snake_path, ReadoutBeat, SnakeReadout};
pub use schedule::{EdgeInputs, EdgeLane, InputSchedule};
pub use stats::{CycleStats, MacActivity, ToggleCounts};

use crate::error::{Error, Result};
use crate::mac::MacConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SaConfig {
    pub rows: usize,
    pub cols: usize,
    pub mac: MacConfig,
}

impl SaConfig {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        Self::with_mac(rows, cols, MacConfig::default())
    }

    pub fn with_mac(rows: usize, cols: usize, mac: MacConfig) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "array needs at least one row and column, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols, mac })
    }

    /// The three evaluated topologies: 16x4, 32x8 and 64x16 (cols x rows).
    pub fn presets() -> [SaConfig; 3] {
        [(4, 16), (8, 32), (16, 64)].map(|(rows, cols)| SaConfig {
            rows,
            cols,
            mac: MacConfig::default(),
        })
    }

    pub fn b_max(&self) -> u32 {
        self.mac.b_max
    }

    pub fn mac_count(&self) -> usize {
        self.rows * self.cols
    }

    /// `cols x rows` label.
    pub fn topology(&self) -> String {
        format!("{}x{}", self.cols, self.rows)
    }
}

impl fmt::Display for SaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (cols x rows; {} rows, {} cols)",
            self.topology(),
            self.rows,
            self.cols
        )
    }
}

/// Parses a `cols x rows` topology such as `32x8`.
impl FromStr for SaConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("topology `{s}` is not of the form <cols>x<rows>"));
        let (cols, rows) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let cols = cols.trim().parse().map_err(|_| bad())?;
        let rows = rows.trim().parse().map_err(|_| bad())?;
        SaConfig::new(rows, cols)
    }
}

/// Component counts for a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub mac_count: usize,
    /// Two-input readout multiplexers, `rows*cols - 1`.
    pub mux_count: usize,
    /// Readout pipeline registers as published, `(rows-1)(cols-1) + 1`.
    pub pipeline_register_count_published: usize,
    /// Registers in this model's readout chain (one per MAC).
    pub readout_chain_registers: usize,
    /// One-hop data propagation registers between neighbouring MACs.
    pub data_pipeline_registers: usize,
    pub p2s_units: usize,
}

pub fn structural_report(config: &SaConfig) -> StructuralReport {
    let (r, c) = (config.rows, config.cols);
    StructuralReport {
        mac_count: r * c,
        mux_count: r * c - 1,
        pipeline_register_count_published: (r - 1) * (c - 1) + 1,
        readout_chain_registers: r * c,
        data_pipeline_registers: (r - 1) * c + r * (c - 1),
        p2s_units: r + c,
    }
}
