//! Edge-injection plan for one matrix multiplication.
//!
//! Column `c` of `B` is injected `c` cycles late and row `r` of `A` `r`
//! cycles late. A MAC at `(r, c)` receives vertical data after `r` hops and
//! horizontal data after `c` hops, so both of its streams are shifted by the
//! same `r + c` cycles and the local multiplicand lead stays exactly `width`.

use crate::bitmath::SignedWord;
use crate::error::{Error, Result};

use super::{Matrix, SaConfig};

/// What an edge converter receives in one cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeLane {
    /// Word latched into the converter this cycle.
    pub load: Option<SignedWord>,
    pub enable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeInputs {
    /// Top edge, one lane per column (multiplicands).
    pub cols: Vec<EdgeLane>,
    /// Left edge, one lane per row (multipliers).
    pub rows: Vec<EdgeLane>,
}

impl EdgeInputs {
    pub fn idle(config: &SaConfig) -> Self {
        Self {
            cols: vec![EdgeLane::default(); config.cols],
            rows: vec![EdgeLane::default(); config.rows],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSchedule {
    width: u32,
    /// Shared dimension.
    n: usize,
    array_rows: usize,
    array_cols: usize,
    /// Per active column: `n` multiplicands followed by a closing zero word.
    col_words: Vec<Vec<SignedWord>>,
    /// Per active row: `n` multipliers.
    row_words: Vec<Vec<SignedWord>>,
}

impl InputSchedule {
    /// Plans `A (m x n) * B (n x p)` on the top-left `m x p` corner.
    pub fn new(config: &SaConfig, a: &Matrix, b: &Matrix, width: u32) -> Result<Self> {
        if a.cols() != b.rows() || a.cols() == 0 {
            return Err(Error::ShapeMismatch {
                a_rows: a.rows(),
                a_cols: a.cols(),
                b_rows: b.rows(),
                b_cols: b.cols(),
            });
        }
        if a.rows() > config.rows {
            return Err(Error::DimensionOverflow {
                what: "A rows",
                got: a.rows(),
                limit: config.rows,
            });
        }
        if b.cols() > config.cols {
            return Err(Error::DimensionOverflow {
                what: "B columns",
                got: b.cols(),
                limit: config.cols,
            });
        }
        config.mac.check_width(width)?;
        for m in [a, b] {
            if m.width() > width {
                return Err(Error::WidthOverflow {
                    width: m.width(),
                    b_max: width,
                });
            }
        }
        config.mac.check_capacity(a.cols(), width)?;
        let n = a.cols();
        let zero = SignedWord::zero(width)?;
        let col_words = (0..b.cols())
            .map(|c| {
                (0..n)
                    .map(|k| b.word(k, c).extend_to(width))
                    .chain(std::iter::once(Ok(zero)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let row_words = (0..a.rows())
            .map(|r| {
                (0..n)
                    .map(|k| a.word(r, k).extend_to(width))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            width,
            n,
            array_rows: config.rows,
            array_cols: config.cols,
            col_words,
            row_words,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn active_rows(&self) -> usize {
        self.row_words.len()
    }

    pub fn active_cols(&self) -> usize {
        self.col_words.len()
    }

    /// Cycles each MAC spends on the dot product, `(n+1) * width`.
    pub fn stream_cycles(&self) -> u64 {
        (self.n as u64 + 1) * self.width as u64
    }

    /// Injection skew of the farthest active MAC.
    pub fn fill_cycles(&self) -> u64 {
        (self.active_rows() + self.active_cols() - 2) as u64
    }

    /// Cycles from the first injection until the last active MAC finishes.
    pub fn span(&self) -> u64 {
        self.fill_cycles() + self.stream_cycles()
    }

    /// Local time of a lane delayed by `offset`, if its stream is live.
    fn local(&self, t: u64, offset: usize) -> Option<u64> {
        let local = t.checked_sub(offset as u64)?;
        (local < self.stream_cycles()).then_some(local)
    }

    pub fn inputs_at(&self, t: u64) -> EdgeInputs {
        let w = self.width as u64;
        let mut cols = vec![EdgeLane::default(); self.array_cols];
        for (c, words) in self.col_words.iter().enumerate() {
            if let Some(local) = self.local(t, c) {
                cols[c] = EdgeLane {
                    load: (local % w == 0).then(|| words[(local / w) as usize]),
                    enable: true,
                };
            }
        }
        let mut rows = vec![EdgeLane::default(); self.array_rows];
        for (r, words) in self.row_words.iter().enumerate() {
            if let Some(local) = self.local(t, r) {
                rows[r] = EdgeLane {
                    load: (local >= w && local % w == 0).then(|| words[(local / w - 1) as usize]),
                    enable: true,
                };
            }
        }
        EdgeInputs { cols, rows }
    }
}
