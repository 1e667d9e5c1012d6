//! Cycle-accurate bit-serial MAC units.
//!
//! Both variants share the multiplicand mask circuit and the
//! multiplication-enable latch ([`frontend`]). They differ only in how the
//! stream of multiplier bits is folded into the accumulator:
//!
//! * [`BoothMac`] recodes each `(current, previous)` multiplier bit pair and
//!   adds or subtracts the shifted multiplicand with a single adder.
//! * [`SbmwcMac`] keeps a sum and a difference candidate because it cannot
//!   tell whether the current multiplier bit is the sign bit until the next
//!   operand boundary arrives.
//!
//! All registers update together at the end of [`BitSerialMac::step`]; the
//! values visible between calls are the register outputs of the cycle that
//! follows.

mod booth;
mod driver;
mod frontend;
mod p2s;
mod sbmwc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use booth::BoothMac;
pub use driver::{check_stream, dot_product_stream, MacDriver, MacRun};
pub use frontend::Frontend;
pub use p2s::{P2s, ShiftDirection};
pub use sbmwc::SbmwcMac;

use crate::bitmath::{BoothAction, RecodeTable, MAX_WORD_WIDTH};
use crate::error::{Error, Result};
use crate::scalar::AccWord;

pub const DEFAULT_B_MAX: u32 = 16;
pub const DEFAULT_GUARD_BITS: u32 = 16;

/// Construction-time MAC parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MacConfig {
    /// Widest operand the unit accepts.
    pub b_max: u32,
    /// Extra accumulator bits above the full-scale product.
    pub guard: u32,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            b_max: DEFAULT_B_MAX,
            guard: DEFAULT_GUARD_BITS,
        }
    }
}

impl MacConfig {
    pub fn new(b_max: u32) -> Self {
        Self {
            b_max,
            ..Self::default()
        }
    }

    pub fn acc_width(&self) -> u32 {
        2 * self.b_max + self.guard
    }

    /// Checks the configuration against a register type.
    pub fn validate<T: AccWord>(&self) -> Result<()> {
        if self.b_max == 0 || self.b_max > MAX_WORD_WIDTH {
            return Err(Error::InvalidWidth {
                width: self.b_max,
                max: MAX_WORD_WIDTH,
            });
        }
        if self.acc_width() > T::BITS {
            return Err(Error::RegisterTooNarrow {
                acc_width: self.acc_width(),
                register_bits: T::BITS,
            });
        }
        Ok(())
    }

    pub fn check_width(&self, width: u32) -> Result<()> {
        if width == 0 {
            return Err(Error::InvalidWidth {
                width,
                max: self.b_max,
            });
        }
        if width > self.b_max {
            return Err(Error::WidthOverflow {
                width,
                b_max: self.b_max,
            });
        }
        Ok(())
    }

    /// Fails if `terms` full-scale products of `width` bits could overflow
    /// the accumulator.
    pub fn check_capacity(&self, terms: usize, width: u32) -> Result<()> {
        let worst = (terms as u128) << (2 * width - 2);
        let limit = (1u128 << (self.acc_width() - 1)) - 1;
        if worst > limit {
            Err(Error::AccumulatorCapacity {
                terms,
                width,
                acc_width: self.acc_width(),
            })
        } else {
            Ok(())
        }
    }
}

/// Input pins sampled by a MAC in one clock cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MacCycleInput {
    /// Serial multiplicand bit (MSb first).
    pub mc_bit: bool,
    /// Serial multiplier bit (LSb first).
    pub ml_bit: bool,
    /// Value toggle; flips at every operand boundary.
    pub v_t: bool,
    /// Clock enable derived from the row and column stream enables.
    pub enable: bool,
    pub reset: bool,
    /// Configured operand width. The datapath does not consume it; drivers
    /// use it to check the toggle cadence.
    pub width: u32,
}

/// Combinational outcome of one step, reported for tracing and accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepInfo {
    pub enabled: bool,
    /// `v_t` differed from its registered copy.
    pub edge: bool,
    /// A multiplier bit was folded into the accumulator.
    pub mul: bool,
    /// Booth action taken (Booth units only).
    pub booth: Option<BoothAction>,
    /// Accumulator register bits that flipped.
    pub acc_toggles: u32,
    /// Multiplicand, mask and control register bits that flipped.
    pub datapath_toggles: u32,
}

/// Register values of one MAC, widened for reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacSnapshot {
    /// Booth accumulator, or the sum candidate of an SBMwC unit.
    pub acc: i128,
    /// Difference candidate (SBMwC only).
    pub acc_diff: Option<i128>,
    pub m_mc: i128,
    pub mc_reg: u128,
    pub mask: u64,
    pub s_m: u128,
    pub v_t_prev: bool,
    pub mult_en: bool,
}

impl MacSnapshot {
    pub fn is_zero(&self) -> bool {
        *self
            == MacSnapshot {
                acc_diff: self.acc_diff.map(|_| 0),
                ..MacSnapshot::default()
            }
    }
}

pub trait BitSerialMac<T: AccWord> {
    /// Advances one clock cycle.
    fn step(&mut self, input: &MacCycleInput) -> StepInfo;

    /// The completed dot product once the last multiplier word has streamed.
    fn result(&self) -> T;

    fn snapshot(&self) -> MacSnapshot;

    fn frontend(&self) -> &Frontend;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MacVariant {
    Booth,
    Sbmwc,
}

impl MacVariant {
    pub const ALL: [MacVariant; 2] = [MacVariant::Booth, MacVariant::Sbmwc];

    pub fn name(self) -> &'static str {
        match self {
            MacVariant::Booth => "booth",
            MacVariant::Sbmwc => "sbmwc",
        }
    }
}

impl fmt::Display for MacVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MacVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "booth" => Ok(MacVariant::Booth),
            "sbmwc" => Ok(MacVariant::Sbmwc),
            other => Err(Error::Config(format!("unknown MAC variant `{other}`"))),
        }
    }
}

/// Either MAC variant; lets an array hold a uniform grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MacUnit<T: AccWord> {
    Booth(BoothMac<T>),
    Sbmwc(SbmwcMac<T>),
}

impl<T: AccWord> MacUnit<T> {
    pub fn new(variant: MacVariant, config: &MacConfig, recode: RecodeTable) -> Self {
        match variant {
            MacVariant::Booth => MacUnit::Booth(BoothMac::with_recode(config, recode)),
            MacVariant::Sbmwc => MacUnit::Sbmwc(SbmwcMac::new(config)),
        }
    }

    pub fn variant(&self) -> MacVariant {
        match self {
            MacUnit::Booth(_) => MacVariant::Booth,
            MacUnit::Sbmwc(_) => MacVariant::Sbmwc,
        }
    }
}

impl<T: AccWord> BitSerialMac<T> for MacUnit<T> {
    #[inline]
    fn step(&mut self, input: &MacCycleInput) -> StepInfo {
        match self {
            MacUnit::Booth(m) => m.step(input),
            MacUnit::Sbmwc(m) => m.step(input),
        }
    }

    #[inline]
    fn result(&self) -> T {
        match self {
            MacUnit::Booth(m) => m.result(),
            MacUnit::Sbmwc(m) => m.result(),
        }
    }

    fn snapshot(&self) -> MacSnapshot {
        match self {
            MacUnit::Booth(m) => m.snapshot(),
            MacUnit::Sbmwc(m) => m.snapshot(),
        }
    }

    fn frontend(&self) -> &Frontend {
        match self {
            MacUnit::Booth(m) => m.frontend(),
            MacUnit::Sbmwc(m) => m.frontend(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_accumulator_is_48_bits() {
        let cfg = MacConfig::default();
        assert_eq!(cfg.acc_width(), 48);
        assert!(cfg.validate::<i64>().is_ok());
        assert!(cfg.validate::<i32>().is_err());
        assert!(MacConfig::new(32).validate::<i64>().is_err());
        assert!(MacConfig::new(32).validate::<i128>().is_ok());
    }

    #[test]
    fn capacity_limits() {
        let cfg = MacConfig::default();
        assert!(cfg.check_capacity(1 << 16, 16).is_ok());
        assert!(cfg.check_capacity(1 << 17, 16).is_err());
        assert!(cfg.check_capacity(1000, 16).is_ok());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("Booth".parse::<MacVariant>().unwrap(), MacVariant::Booth);
        assert_eq!("sbmwc".parse::<MacVariant>().unwrap(), MacVariant::Sbmwc);
        assert!("wallace".parse::<MacVariant>().is_err());
    }
}
