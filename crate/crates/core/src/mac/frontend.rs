//! Multiplicand mask circuit and multiplication-enable latch.
//!
//! The multiplicand arrives MSb first into `mc_reg`, which keeps shifting
//! left while the next multiplicand streams in behind the one being used.
//! `mask` grows by one leading one per cycle between toggles; on a toggle edge
//! it is copied into the shift mask `s_m`, which then shifts in lock-step with
//! `mc_reg` so that `mc_reg & s_m` is always the in-flight multiplicand scaled
//! by the current multiplier bit weight.

use crate::bitmath::low_mask;

use super::MacCycleInput;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Frontend {
    pub mc_reg: u128,
    pub mask: u64,
    pub s_m: u128,
    pub v_t_prev: bool,
    /// A complete multiplicand has been received at least once.
    pub mc_seen: bool,
    pub mult_en: bool,
}

/// Combinational outputs for the current cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontendOut {
    pub edge: bool,
    pub mul: bool,
    /// Masked multiplicand, sign-extended from the top bit of the active
    /// mask. Already carries the `2^i` weight of multiplier bit `i`.
    pub operand: i128,
    /// Register bits flipped by this clock.
    pub toggles: u32,
}

#[inline]
fn reg_mask(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

/// Sign-extends the field of `value` selected by a contiguous `mask`.
#[inline]
fn masked_signed(value: u128, mask: u128) -> i128 {
    if mask == 0 {
        return 0;
    }
    let field = value & mask;
    let top = 1u128 << (127 - mask.leading_zeros());
    if field & top != 0 {
        field as i128 - (top << 1) as i128
    } else {
        field as i128
    }
}

impl Frontend {
    /// Clocks the circuit once (the caller has already handled reset and
    /// clock-enable) and returns the outputs seen by the accumulator logic.
    #[inline]
    pub fn clock(&mut self, input: &MacCycleInput, b_max: u32) -> FrontendOut {
        let edge = input.v_t != self.v_t_prev;
        let active = if edge { self.mask as u128 } else { self.s_m };
        let operand = masked_signed(self.mc_reg, active);
        let mul = if edge { self.mc_seen } else { self.mult_en };

        let wide = reg_mask(2 * b_max);
        let next = Frontend {
            mc_reg: ((self.mc_reg << 1) | input.mc_bit as u128) & wide,
            mask: if edge {
                1
            } else {
                ((self.mask << 1) | 1) & low_mask(b_max)
            },
            s_m: (active << 1) & wide,
            v_t_prev: input.v_t,
            mc_seen: self.mc_seen || edge,
            mult_en: mul,
        };
        let toggles = (self.mc_reg ^ next.mc_reg).count_ones()
            + (self.mask ^ next.mask).count_ones()
            + (self.s_m ^ next.s_m).count_ones()
            + (self.v_t_prev != next.v_t_prev) as u32
            + (self.mc_seen != next.mc_seen) as u32
            + (self.mult_en != next.mult_en) as u32;
        *self = next;
        FrontendOut {
            edge,
            mul,
            operand,
            toggles,
        }
    }

    /// Population count of the shift mask; equals the operand width right
    /// after a toggle edge.
    pub fn shift_mask_width(&self) -> u32 {
        self.s_m.count_ones()
    }
}
