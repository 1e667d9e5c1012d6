use std::io;

use thiserror::Error;

/// Streaming-protocol violations detected by the drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProtocolViolation {
    #[error("value toggle flipped after {observed} cycles, expected every {expected}")]
    ToggleCadence { observed: u64, expected: u32 },
    #[error("parallel-to-serial converter loaded with {remaining} bits still pending")]
    MidWordLoad { remaining: u32 },
    #[error("configured width changed mid-stream ({from} -> {to})")]
    WidthChanged { from: u32, to: u32 },
    #[error("first enabled cycle does not carry a value toggle")]
    MissingLeadingToggle,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit width {width} outside supported range 1..={max}")]
    InvalidWidth { width: u32, max: u32 },

    #[error("value {value} does not fit in {width} signed bits")]
    ValueOutOfRange { value: i64, width: u32 },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dot product needs at least one element")]
    EmptyVector,

    #[error("incompatible matrix shapes: {a_rows}x{a_cols} times {b_rows}x{b_cols}")]
    ShapeMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },

    #[error("{what} {got} exceeds array limit {limit}")]
    DimensionOverflow {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("operand width {width} exceeds b_max {b_max}")]
    WidthOverflow { width: u32, b_max: u32 },

    #[error("{terms} terms of width {width} can overflow a {acc_width}-bit accumulator")]
    AccumulatorCapacity {
        terms: usize,
        width: u32,
        acc_width: u32,
    },

    #[error("accumulator width {acc_width} does not fit the {register_bits}-bit register type")]
    RegisterTooNarrow { acc_width: u32, register_bits: u32 },

    #[error("protocol violation at cycle {cycle}: {kind}")]
    Protocol { cycle: u64, kind: ProtocolViolation },

    #[error("readout requested while operands are still in flight")]
    ReadoutBusy,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
