use crate::bitmath::{BoothAction, RecodeTable};
use crate::scalar::AccWord;

use super::frontend::Frontend;
use super::{BitSerialMac, MacConfig, MacCycleInput, MacSnapshot, StepInfo};

/// Booth-recoded bit-serial MAC with a single accumulator adder.
///
/// The multiplicand is sign-extended and shifted left every cycle instead of
/// shifting the accumulator right, so the accumulator always holds the exact
/// running dot product (including the partial sum of the in-flight word).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoothMac<T: AccWord> {
    front: Frontend,
    acc: T,
    /// Last applied multiplicand operand.
    m_mc: T,
    ml_prev: bool,
    recode: RecodeTable,
    b_max: u32,
    acc_width: u32,
}

impl<T: AccWord> BoothMac<T> {
    pub fn new(config: &MacConfig) -> Self {
        Self::with_recode(config, RecodeTable::BOOTH)
    }

    pub fn with_recode(config: &MacConfig, recode: RecodeTable) -> Self {
        Self {
            front: Frontend::default(),
            acc: T::zero(),
            m_mc: T::zero(),
            ml_prev: false,
            recode,
            b_max: config.b_max,
            acc_width: config.acc_width(),
        }
    }

    pub fn acc(&self) -> T {
        self.acc
    }

    pub fn ml_prev(&self) -> bool {
        self.ml_prev
    }
}

impl<T: AccWord> BitSerialMac<T> for BoothMac<T> {
    fn step(&mut self, input: &MacCycleInput) -> StepInfo {
        if input.reset {
            let before = (self.acc, self.m_mc);
            *self = Self::with_recode(
                &MacConfig {
                    b_max: self.b_max,
                    guard: self.acc_width - 2 * self.b_max,
                },
                self.recode,
            );
            return StepInfo {
                acc_toggles: before.0.hamming(T::zero()),
                datapath_toggles: before.1.hamming(T::zero()),
                ..StepInfo::default()
            };
        }
        if !input.enable {
            return StepInfo::default();
        }

        let out = self.front.clock(input, self.b_max);
        let prev = if out.edge { false } else { self.ml_prev };
        let action = self.recode.action(input.ml_bit, prev);

        let mut info = StepInfo {
            enabled: true,
            edge: out.edge,
            mul: out.mul,
            datapath_toggles: out.toggles,
            ..StepInfo::default()
        };
        if out.mul {
            let operand = T::from_wide(out.operand).wrap_to(self.acc_width);
            let acc = match action {
                BoothAction::Nop => self.acc,
                BoothAction::AddM => self.acc.wrapping_add(&operand).wrap_to(self.acc_width),
                BoothAction::SubM => self.acc.wrapping_sub(&operand).wrap_to(self.acc_width),
            };
            info.acc_toggles = self.acc.hamming(acc);
            info.datapath_toggles +=
                self.m_mc.hamming(operand) + (self.ml_prev != input.ml_bit) as u32;
            info.booth = Some(action);
            self.acc = acc;
            self.m_mc = operand;
            self.ml_prev = input.ml_bit;
        }
        info
    }

    fn result(&self) -> T {
        self.acc
    }

    fn snapshot(&self) -> MacSnapshot {
        MacSnapshot {
            acc: self.acc.to_wide(),
            acc_diff: None,
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
