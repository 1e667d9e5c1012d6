use crate::scalar::AccWord;

use super::frontend::Frontend;
use super::{BitSerialMac, MacConfig, MacCycleInput, MacSnapshot, StepInfo};

/// Shift-add MAC with sign-bit correction and two candidate accumulators.
///
/// For every set multiplier bit, `acc_sum` takes the "ordinary bit" path and
/// `acc_diff` the "sign bit" path. The next toggle edge tells which one was
/// right: a new word starts from `acc_diff`, any other cycle continues from
/// `acc_sum`. When the final bit is 0 both candidates are equal, so after a
/// completed word `acc_diff` always holds the committed value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbmwcMac<T: AccWord> {
    front: Frontend,
    acc_sum: T,
    acc_diff: T,
    m_mc: T,
    b_max: u32,
    acc_width: u32,
}

impl<T: AccWord> SbmwcMac<T> {
    pub fn new(config: &MacConfig) -> Self {
        Self {
            front: Frontend::default(),
            acc_sum: T::zero(),
            acc_diff: T::zero(),
            m_mc: T::zero(),
            b_max: config.b_max,
            acc_width: config.acc_width(),
        }
    }

    pub fn acc_sum(&self) -> T {
        self.acc_sum
    }

    pub fn acc_diff(&self) -> T {
        self.acc_diff
    }
}

impl<T: AccWord> BitSerialMac<T> for SbmwcMac<T> {
    fn step(&mut self, input: &MacCycleInput) -> StepInfo {
        if input.reset {
            let toggles = self.acc_sum.hamming(T::zero()) + self.acc_diff.hamming(T::zero());
            let dp = self.m_mc.hamming(T::zero());
            *self = Self::new(&MacConfig {
                b_max: self.b_max,
                guard: self.acc_width - 2 * self.b_max,
            });
            return StepInfo {
                acc_toggles: toggles,
                datapath_toggles: dp,
                ..StepInfo::default()
            };
        }
        if !input.enable {
            return StepInfo::default();
        }

        let out = self.front.clock(input, self.b_max);
        let mut info = StepInfo {
            enabled: true,
            edge: out.edge,
            mul: out.mul,
            datapath_toggles: out.toggles,
            ..StepInfo::default()
        };
        if out.mul {
            let base = if out.edge {
                self.acc_diff
            } else {
                self.acc_sum
            };
            let operand = T::from_wide(out.operand).wrap_to(self.acc_width);
            let (sum, diff) = if input.ml_bit {
                (
                    base.wrapping_add(&operand).wrap_to(self.acc_width),
                    base.wrapping_sub(&operand).wrap_to(self.acc_width),
                )
            } else {
                (base, base)
            };
            info.acc_toggles = self.acc_sum.hamming(sum) + self.acc_diff.hamming(diff);
            info.datapath_toggles += self.m_mc.hamming(operand);
            self.acc_sum = sum;
            self.acc_diff = diff;
            self.m_mc = operand;
        }
        info
    }

    fn result(&self) -> T {
        self.acc_diff
    }

    fn snapshot(&self) -> MacSnapshot {
        MacSnapshot {
            acc: self.acc_sum.to_wide(),
            acc_diff: Some(self.acc_diff.to_wide()),
            m_mc: self.m_mc.to_wide(),
            mc_reg: self.front.mc_reg,
            mask: self.front.mask,
            s_m: self.front.s_m,
            v_t_prev: self.front.v_t_prev,
            mult_en: self.front.mult_en,
        }
    }

    fn frontend(&self) -> &Frontend {
        &self.front
    }
}
