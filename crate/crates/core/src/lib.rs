//! Cycle-accurate model of a bit-serial systolic matrix-multiplication
//! accelerator.
//!
//! * [`bitmath`]: two's-complement words, bit ordering and reference
//!   multipliers.
//! * [`mac`]: Booth and SBMwC bit-serial MAC units and their stream drivers.
//! * [`sa`]: the systolic array, its input scheduler and snake readout.
//! * [`perfmodel`]: analytic throughput model.
//! * [`verify`]: the randomized and exhaustive verification suite.
//! * [`trace`]: per-cycle trace records with CSV and VCD sinks.
//!
//! Register and model arithmetic is generic; the aliases below fix the
//! common choices.

pub mod bitmath;
pub mod error;
pub mod mac;
pub mod perfmodel;
pub mod sa;
pub mod scalar;
pub mod trace;
pub mod verify;

pub use bitmath::SignedWord;
pub use error::{Error, ProtocolViolation, Result};
pub use mac::{MacConfig, MacVariant};
pub use sa::{Matrix, SaConfig};
pub use scalar::{AccWord, PerfScalar, Rational};

/// 64-bit accumulator registers; enough for the default 48-bit accumulator.
pub type Acc = i64;
pub type BoothMac64 = mac::BoothMac<Acc>;
pub type SbmwcMac64 = mac::SbmwcMac<Acc>;
pub type Driver = mac::MacDriver<Acc>;
pub type Array = sa::SystolicArray<Acc>;
/// 128-bit registers, for operands wider than 16 bits.
pub type WideDriver = mac::MacDriver<i128>;
pub type WideArray = sa::SystolicArray<i128>;
