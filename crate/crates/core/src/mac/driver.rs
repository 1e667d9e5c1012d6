//! Single-MAC drivers implementing the streaming protocol.
//!
//! Multiplicand word `k` streams MSb first during cycles `[k*w, (k+1)*w)`;
//! multiplier word `k` streams LSb first one word later, during
//! `[(k+1)*w, (k+2)*w)`. The value toggle flips whenever a new multiplicand
//! is loaded, including a trailing zero word that closes the last
//! multiplication. A dot product of `n` terms therefore takes `(n+1)*w`
//! cycles.

use std::marker::PhantomData;

use crate::bitmath::{RecodeTable, SignedWord};
use crate::error::{Error, ProtocolViolation, Result};
use crate::scalar::AccWord;
use crate::trace::{Phase, TraceRecord, TraceSink};

use super::p2s::{P2s, ShiftDirection};
use super::{BitSerialMac, MacConfig, MacCycleInput, MacUnit, MacVariant};

/// Outcome of driving one MAC through a stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MacRun {
    pub result: i128,
    pub cycles: u64,
    /// Number of value-toggle flips seen by the MAC.
    pub toggle_flips: u64,
    pub acc_toggles: u64,
    pub datapath_toggles: u64,
}

/// Serializes two operand vectors into per-cycle MAC inputs using a
/// MSb-first converter for the multiplicands and a LSb-first one for the
/// multipliers. Operands narrower than `width` are sign-extended.
pub fn dot_product_stream(
    multiplicands: &[SignedWord],
    multipliers: &[SignedWord],
    width: u32,
) -> Result<Vec<MacCycleInput>> {
    if multiplicands.len() != multipliers.len() {
        return Err(Error::LengthMismatch {
            left: multiplicands.len(),
            right: multipliers.len(),
        });
    }
    if multiplicands.is_empty() {
        return Err(Error::EmptyVector);
    }
    let n = multiplicands.len();
    let w = width as usize;
    let mut mc = P2s::new(ShiftDirection::MsbFirstShiftLeft);
    let mut ml = P2s::new(ShiftDirection::LsbFirstShiftRight);
    let mut v_t = false;
    let zero = SignedWord::zero(width)?;
    let mut out = Vec::with_capacity((n + 1) * w);
    for t in 0..(n + 1) * w {
        if t % w == 0 {
            let k = t / w;
            let next_mc = if k < n {
                multiplicands[k].extend_to(width)?
            } else {
                zero
            };
            mc.load(next_mc).map_err(|kind| Error::Protocol {
                cycle: t as u64,
                kind,
            })?;
            v_t = !v_t;
            if k >= 1 {
                ml.load(multipliers[k - 1].extend_to(width)?)
                    .map_err(|kind| Error::Protocol {
                        cycle: t as u64,
                        kind,
                    })?;
            }
        }
        out.push(MacCycleInput {
            mc_bit: mc.step(),
            ml_bit: ml.step(),
            v_t,
            enable: true,
            reset: false,
            width,
        });
    }
    Ok(out)
}

/// Verifies a stream follows the toggle protocol: every enabled segment
/// between value-toggle flips (and the final one) lasts exactly `width`
/// cycles, and the width does not change until the next reset.
pub fn check_stream(inputs: &[MacCycleInput]) -> Result<()> {
    let violation = |cycle: usize, kind| {
        Err(Error::Protocol {
            cycle: cycle as u64,
            kind,
        })
    };
    let mut level = false;
    let mut width: Option<u32> = None;
    let mut seg = 0u64;
    for (t, input) in inputs.iter().enumerate() {
        if input.reset {
            level = false;
            width = None;
            seg = 0;
            continue;
        }
        if !input.enable {
            continue;
        }
        let toggle = input.v_t != level;
        level = input.v_t;
        match width {
            None => {
                if !toggle {
                    return violation(t, ProtocolViolation::MissingLeadingToggle);
                }
                width = Some(input.width);
                seg = 1;
            }
            Some(w) => {
                if input.width != w {
                    return violation(
                        t,
                        ProtocolViolation::WidthChanged {
                            from: w,
                            to: input.width,
                        },
                    );
                }
                if toggle {
                    if seg != w as u64 {
                        return violation(
                            t,
                            ProtocolViolation::ToggleCadence {
                                observed: seg,
                                expected: w,
                            },
                        );
                    }
                    seg = 1;
                } else {
                    seg += 1;
                    if seg > w as u64 {
                        return violation(
                            t,
                            ProtocolViolation::ToggleCadence {
                                observed: seg,
                                expected: w,
                            },
                        );
                    }
                }
            }
        }
    }
    match width {
        Some(w) if seg != w as u64 => violation(
            inputs.len(),
            ProtocolViolation::ToggleCadence {
                observed: seg,
                expected: w,
            },
        ),
        _ => Ok(()),
    }
}

/// Drives a single MAC of either variant.
#[derive(Debug, Clone, Copy)]
pub struct MacDriver<T: AccWord> {
    pub variant: MacVariant,
    pub config: MacConfig,
    pub recode: RecodeTable,
    _acc: PhantomData<T>,
}

impl<T: AccWord> MacDriver<T> {
    pub fn new(variant: MacVariant, config: MacConfig) -> Result<Self> {
        config.validate::<T>()?;
        Ok(Self {
            variant,
            config,
            recode: RecodeTable::BOOTH,
            _acc: PhantomData,
        })
    }

    /// Replaces the Booth control table (fault-injection hook).
    pub fn with_recode(mut self, recode: RecodeTable) -> Self {
        self.recode = recode;
        self
    }

    pub fn unit(&self) -> MacUnit<T> {
        MacUnit::new(self.variant, &self.config, self.recode)
    }

    /// One multiplication `a * b` with `a` as the multiplicand. Operands are
    /// sign-extended to the wider of the two widths.
    pub fn multiply(&self, a: SignedWord, b: SignedWord) -> Result<MacRun> {
        let width = a.width().max(b.width());
        self.dot(&[a], &[b], width)
    }

    pub fn dot(&self, a: &[SignedWord], b: &[SignedWord], width: u32) -> Result<MacRun> {
        self.run_dot(a, b, width, None)
    }

    pub fn dot_traced(
        &self,
        a: &[SignedWord],
        b: &[SignedWord],
        width: u32,
        sink: &mut dyn TraceSink,
    ) -> Result<MacRun> {
        self.run_dot(a, b, width, Some(sink))
    }

    fn run_dot(
        &self,
        a: &[SignedWord],
        b: &[SignedWord],
        width: u32,
        sink: Option<&mut dyn TraceSink>,
    ) -> Result<MacRun> {
        self.config.check_width(width)?;
        for word in a.iter().chain(b) {
            if word.width() > width {
                return Err(Error::WidthOverflow {
                    width: word.width(),
                    b_max: width,
                });
            }
        }
        self.config.check_capacity(a.len(), width)?;
        let stream = dot_product_stream(a, b, width)?;
        self.run_stream(&stream, sink)
    }

    /// Checks and then clocks an arbitrary input stream through a fresh MAC.
    pub fn run_stream(
        &self,
        inputs: &[MacCycleInput],
        mut sink: Option<&mut dyn TraceSink>,
    ) -> Result<MacRun> {
        check_stream(inputs)?;
        let mut mac = self.unit();
        let mut run = MacRun::default();
        for (t, input) in inputs.iter().enumerate() {
            let before = mac.snapshot();
            let info = mac.step(input);
            run.toggle_flips += info.edge as u64;
            run.acc_toggles += info.acc_toggles as u64;
            run.datapath_toggles += info.datapath_toggles as u64;
            if let Some(s) = sink.as_deref_mut() {
                s.record(&TraceRecord {
                    cycle: t as u64,
                    phase: Phase::Compute,
                    row: 0,
                    col: 0,
                    input: *input,
                    info,
                    regs: before,
                    read_port: None,
                })?;
            }
        }
        if let Some(s) = sink {
            s.finish()?;
        }
        run.cycles = inputs.len() as u64;
        run.result = mac.result().to_wide();
        Ok(run)
    }
}
