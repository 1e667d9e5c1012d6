//! Analytic throughput model.
//!
//! One OP is one multiply-accumulate. For `A (m x n) * B (n x p)` on an
//! array of `sa_width x sa_height` MACs streaming `w`-bit operands:
//!
//! ```text
//! op/cycle = n * m * p / ((n + 1) * w + sa_width * sa_height)
//! peak     = sa_width * sa_height / w
//! ```
//!
//! The denominator counts the streaming latency of one dot product plus one
//! readout cycle per MAC; input skew across the array is not part of it.
//! All formulas are generic over [`PerfScalar`], so they can be evaluated
//! exactly with rationals or approximately with floats.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sa::CycleStats;
use crate::scalar::{PerfScalar, Rational};

/// Widest operand the model accepts.
pub const MAX_MODEL_WIDTH: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerfQuery {
    /// Shared dimension.
    pub n: u64,
    /// Output columns (`p`).
    pub a_width_elems: u64,
    /// Output rows (`m`).
    pub b_height_elems: u64,
    pub bit_width: u32,
    /// Array columns.
    pub sa_width: u64,
    /// Array rows.
    pub sa_height: u64,
    pub freq_hz: Option<u64>,
}

impl PerfQuery {
    /// Matrices that exactly cover the array.
    pub fn full(sa_width: u64, sa_height: u64, bit_width: u32, n: u64) -> Self {
        Self {
            n,
            a_width_elems: sa_width,
            b_height_elems: sa_height,
            bit_width,
            sa_width,
            sa_height,
            freq_hz: None,
        }
    }

    pub fn at(mut self, freq_hz: u64) -> Self {
        self.freq_hz = Some(freq_hz);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.bit_width == 0 || self.bit_width > MAX_MODEL_WIDTH {
            return Err(Error::InvalidWidth {
                width: self.bit_width,
                max: MAX_MODEL_WIDTH,
            });
        }
        let counts = [
            ("n", self.n),
            ("matrix width", self.a_width_elems),
            ("matrix height", self.b_height_elems),
            ("array width", self.sa_width),
            ("array height", self.sa_height),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.freq_hz == Some(0) {
            return Err(Error::Config("frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn total_ops(&self) -> u64 {
        self.n * self.a_width_elems * self.b_height_elems
    }

    /// Denominator of the model: streaming plus readout cycles.
    pub fn model_cycles(&self) -> u64 {
        (self.n + 1) * self.bit_width as u64 + self.sa_width * self.sa_height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfResult<S> {
    pub op_per_cycle: S,
    pub peak_op_per_cycle: S,
    pub gops: Option<f64>,
    pub model_cycles: u64,
}

pub fn op_per_cycle<S: PerfScalar>(q: &PerfQuery) -> S {
    S::from_count(q.total_ops()) / S::from_count(q.model_cycles())
}

pub fn peak_op_per_cycle<S: PerfScalar>(sa_width: u64, sa_height: u64, bit_width: u32) -> S {
    S::from_count(sa_width * sa_height) / S::from_count(bit_width as u64)
}

/// Billions of operations per second.
pub fn gops<S: PerfScalar>(op_per_cycle: &S, freq_hz: u64) -> f64 {
    gops_exact(op_per_cycle, freq_hz).to_f64()
}

/// [`gops`] evaluated in `S`.
pub fn gops_exact<S: PerfScalar>(op_per_cycle: &S, freq_hz: u64) -> S {
    op_per_cycle.clone() * S::from_count(freq_hz) / S::from_count(1_000_000_000)
}

pub fn evaluate<S: PerfScalar>(q: &PerfQuery) -> Result<PerfResult<S>> {
    q.validate()?;
    let op: S = op_per_cycle(q);
    Ok(PerfResult {
        gops: q.freq_hz.map(|f| gops(&op, f)),
        peak_op_per_cycle: peak_op_per_cycle(q.sa_width, q.sa_height, q.bit_width),
        op_per_cycle: op,
        model_cycles: q.model_cycles(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CycleComparison {
    /// `b_mc * b_ml * n`: one cycle per multiplicand/multiplier bit pair.
    pub bismo_cycles: u64,
    /// `(n + 1) * max(b_mc, b_ml)`.
    pub bitsmm_cycles: u64,
    /// `bismo_cycles / bitsmm_cycles`.
    pub ratio: Rational,
}

pub fn compare_cycle_models(b_mc: u64, b_ml: u64, n: u64) -> Result<CycleComparison> {
    if b_mc == 0 || b_ml == 0 || n == 0 {
        return Err(Error::Config(
            "operand widths and n must be positive".into(),
        ));
    }
    let bismo = crate::bitmath::bismo_cycle_count(b_mc, b_ml, n);
    let bitsmm = (n + 1) * b_mc.max(b_ml);
    Ok(CycleComparison {
        bismo_cycles: bismo,
        bitsmm_cycles: bitsmm,
        ratio: Rational::new(bismo as i128, bitsmm as i128),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<S> {
    /// `cols x rows`.
    pub topology: String,
    pub sa_width: u64,
    pub sa_height: u64,
    pub bit_width: u32,
    /// `None` for the peak (`n -> infinity`) curve.
    pub n: Option<u64>,
    pub freq_hz: Option<u64>,
    pub op_per_cycle: S,
    pub gops: Option<f64>,
}

/// Cross product of topologies (`(sa_width, sa_height)`), widths and
/// frequencies. With `n = None` rows report peak throughput; otherwise the
/// finite-`n` model for full-size matrices. An empty frequency list yields
/// one row per point with no GOPS column.
pub fn sweep<S: PerfScalar>(
    topologies: &[(u64, u64)],
    widths: &[u32],
    freqs_hz: &[u64],
    n: Option<u64>,
) -> Result<Vec<SweepRow<S>>> {
    if topologies.is_empty() || widths.is_empty() {
        return Err(Error::Config("sweep axes must not be empty".into()));
    }
    let freqs: Vec<Option<u64>> = if freqs_hz.is_empty() {
        vec![None]
    } else {
        freqs_hz.iter().copied().map(Some).collect()
    };
    let mut rows = Vec::with_capacity(topologies.len() * widths.len() * freqs.len());
    for &(w, h) in topologies {
        for &bits in widths {
            let q = PerfQuery {
                freq_hz: None,
                ..PerfQuery::full(w, h, bits, n.unwrap_or(1))
            };
            q.validate()?;
            let op: S = match n {
                Some(_) => op_per_cycle(&q),
                None => peak_op_per_cycle(w, h, bits),
            };
            for &f in &freqs {
                if f == Some(0) {
                    return Err(Error::Config("frequency must be positive".into()));
                }
                rows.push(SweepRow {
                    topology: format!("{w}x{h}"),
                    sa_width: w,
                    sa_height: h,
                    bit_width: bits,
                    n,
                    freq_hz: f,
                    gops: f.map(|f| gops(&op, f)),
                    op_per_cycle: op.clone(),
                });
            }
        }
    }
    Ok(rows)
}

/// Simulator measurement next to the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelCheck {
    pub total_ops: u64,
    pub measured_cycles: u64,
    pub fill_cycles: u64,
    pub model_cycles: u64,
    pub measured_op_per_cycle: Rational,
    /// Measured throughput with the input skew removed.
    pub measured_op_per_cycle_without_fill: Rational,
    pub model_op_per_cycle: Rational,
}

impl ModelCheck {
    pub fn matches_without_fill(&self) -> bool {
        self.measured_op_per_cycle_without_fill == self.model_op_per_cycle
    }

    /// Measured over model throughput, including the skew.
    pub fn ratio(&self) -> Rational {
        self.measured_op_per_cycle / self.model_op_per_cycle
    }
}

pub fn validate_model(stats: &CycleStats, q: &PerfQuery) -> Result<ModelCheck> {
    q.validate()?;
    let ops = q.total_ops() as i128;
    let without_fill = stats.total_cycles - stats.fill_cycles;
    if without_fill == 0 {
        return Err(Error::Config("run recorded no cycles".into()));
    }
    Ok(ModelCheck {
        total_ops: q.total_ops(),
        measured_cycles: stats.total_cycles,
        fill_cycles: stats.fill_cycles,
        model_cycles: q.model_cycles(),
        measured_op_per_cycle: Rational::new(ops, stats.total_cycles as i128),
        measured_op_per_cycle_without_fill: Rational::new(ops, without_fill as i128),
        model_op_per_cycle: op_per_cycle(q),
    })
}

/// A published implementation point: clock frequency and the throughput
/// reported for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedPoint {
    pub design: &'static str,
    pub platform: &'static str,
    pub sa_width: u64,
    pub sa_height: u64,
    pub freq_mhz: u64,
    pub gops: f64,
}

impl PublishedPoint {
    /// Peak GOPS at 16-bit operands.
    pub fn model_gops<S: PerfScalar>(&self) -> f64 {
        let peak: S = peak_op_per_cycle(self.sa_width, self.sa_height, 16);
        gops(&peak, self.freq_mhz * 1_000_000)
    }
}

const fn point(
    design: &'static str,
    platform: &'static str,
    sa_width: u64,
    sa_height: u64,
    freq_mhz: u64,
    gops: f64,
) -> PublishedPoint {
    PublishedPoint {
        design,
        platform,
        sa_width,
        sa_height,
        freq_mhz,
        gops,
    }
}

/// FPGA results at 300 MHz.
pub const FPGA_POINTS: [PublishedPoint; 4] = [
    point("16x4", "fpga", 16, 4, 300, 1.2),
    point("16x4 sbmwc", "fpga", 16, 4, 300, 1.2),
    point("32x8", "fpga", 32, 8, 300, 4.8),
    point("64x16", "fpga", 64, 16, 300, 19.2),
];

/// ASIC peak throughput at the maximum clock frequency.
pub const ASIC_MAX_FREQ_POINTS: [PublishedPoint; 8] = [
    point("16x4", "asap7", 16, 4, 1183, 4.73),
    point("16x4 sbmwc", "asap7", 16, 4, 1311, 5.24),
    point("32x8", "asap7", 32, 8, 1124, 17.98),
    point("64x16", "asap7", 64, 16, 1144, 73.22),
    point("16x4", "nangate45", 16, 4, 748, 2.99),
    point("16x4 sbmwc", "nangate45", 16, 4, 730, 2.92),
    point("32x8", "nangate45", 32, 8, 685, 10.96),
    point("64x16", "nangate45", 64, 16, 643, 41.15),
];

/// ASIC throughput at the target clock (1 GHz asap7, 500 MHz nangate45).
pub const ASIC_TARGET_POINTS: [PublishedPoint; 8] = [
    point("16x4", "asap7", 16, 4, 1000, 4.0),
    point("16x4 sbmwc", "asap7", 16, 4, 1000, 4.0),
    point("32x8", "asap7", 32, 8, 1000, 16.0),
    point("64x16", "asap7", 64, 16, 1000, 64.0),
    point("16x4", "nangate45", 16, 4, 500, 2.0),
    point("16x4 sbmwc", "nangate45", 16, 4, 500, 2.0),
    point("32x8", "nangate45", 32, 8, 500, 8.0),
    point("64x16", "nangate45", 64, 16, 500, 32.0),
];

/// Tolerance for comparing against published GOPS, which are rounded.
pub const GOPS_TOLERANCE: f64 = 0.05;

/// The three evaluated topologies as `(sa_width, sa_height)`.
pub const TOPOLOGIES: [(u64, u64); 3] = [(16, 4), (32, 8), (64, 16)];
