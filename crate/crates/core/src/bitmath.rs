//! Word-level reference arithmetic.
//!
//! Everything here is untimed: these functions define what the cycle-accurate
//! units in [`crate::mac`] must compute and serve as the oracle for them.
//!
//! Width-1 words are two's complement like every other width, so the single
//! bit is a sign bit and `1` means `-1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest operand the word type can carry. Array configurations usually cap
/// operands lower (see [`crate::mac::MacConfig::b_max`]).
pub const MAX_WORD_WIDTH: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitOrder {
    LsbFirst,
    MsbFirst,
}

/// A two's-complement integer tagged with its bit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedWord {
    value: i32,
    width: u32,
}

impl SignedWord {
    pub fn new(value: i64, width: u32) -> Result<Self> {
        check_width(width)?;
        if value < Self::min_value(width) || value > Self::max_value(width) {
            return Err(Error::ValueOutOfRange { value, width });
        }
        Ok(Self {
            value: value as i32,
            width,
        })
    }

    pub fn zero(width: u32) -> Result<Self> {
        Self::new(0, width)
    }

    /// Reinterprets the low `width` bits of `pattern` as a signed word.
    pub fn from_pattern(pattern: u64, width: u32) -> Result<Self> {
        check_width(width)?;
        let spare = 64 - width;
        let value = ((pattern << spare) as i64) >> spare;
        Self::new(value, width)
    }

    pub fn min_value(width: u32) -> i64 {
        -(1i64 << (width - 1))
    }

    pub fn max_value(width: u32) -> i64 {
        (1i64 << (width - 1)) - 1
    }

    #[inline]
    pub fn value(self) -> i64 {
        self.value as i64
    }

    #[inline]
    pub fn width(self) -> u32 {
        self.width
    }

    /// The `width`-bit two's-complement encoding, zero above the sign bit.
    #[inline]
    pub fn pattern(self) -> u64 {
        (self.value as i64 as u64) & low_mask(self.width)
    }

    #[inline]
    pub fn bit(self, i: u32) -> bool {
        debug_assert!(i < self.width);
        (self.pattern() >> i) & 1 == 1
    }

    #[inline]
    pub fn sign_bit(self) -> bool {
        self.bit(self.width - 1)
    }

    /// Sign-extends to a wider (or equal) width.
    pub fn extend_to(self, width: u32) -> Result<Self> {
        if width < self.width {
            return Err(Error::Config(format!(
                "cannot narrow a {}-bit word to {} bits",
                self.width, width
            )));
        }
        Self::new(self.value(), width)
    }

    pub fn to_bits(self, order: BitOrder) -> Vec<bool> {
        let mut bits: Vec<bool> = (0..self.width).map(|i| self.bit(i)).collect();
        if order == BitOrder::MsbFirst {
            bits.reverse();
        }
        bits
    }

    pub fn from_bits(bits: &[bool], order: BitOrder) -> Result<Self> {
        let width = bits.len() as u32;
        check_width(width)?;
        let pattern = bits.iter().enumerate().fold(0u64, |acc, (i, &b)| {
            let pos = match order {
                BitOrder::LsbFirst => i as u32,
                BitOrder::MsbFirst => width - 1 - i as u32,
            };
            acc | ((b as u64) << pos)
        });
        Self::from_pattern(pattern, width)
    }
}

impl fmt::Display for SignedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (w{})", self.value, self.width)
    }
}

pub fn check_width(width: u32) -> Result<()> {
    if (1..=MAX_WORD_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(Error::InvalidWidth {
            width,
            max: MAX_WORD_WIDTH,
        })
    }
}

#[inline]
pub fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub fn to_bits(word: SignedWord, order: BitOrder) -> Vec<bool> {
    word.to_bits(order)
}

/// Exact product; the ground truth every multiplier is checked against.
pub fn oracle_product(a: SignedWord, b: SignedWord) -> i64 {
    a.value() * b.value()
}

/// Integer dot product of two operand vectors.
pub fn oracle_dot(a: &[SignedWord], b: &[SignedWord]) -> i128 {
    a.iter()
        .zip(b)
        .map(|(x, y)| oracle_product(*x, *y) as i128)
        .sum()
}

/// Unsigned shift-and-add: each set multiplier bit contributes the
/// multiplicand shifted by that bit's position. Both sequences are LSb first
/// and must have the same length.
pub fn unsigned_shift_add_multiply(multiplicand: &[bool], multiplier: &[bool]) -> u64 {
    assert_eq!(
        multiplicand.len(),
        multiplier.len(),
        "operands must have equal bit length"
    );
    let mc = multiplicand
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
    multiplier
        .iter()
        .enumerate()
        .filter(|(_, &bit)| bit)
        .map(|(i, _)| mc << i)
        .sum()
}

fn common_width(a: SignedWord, b: SignedWord) -> (SignedWord, SignedWord, u32) {
    let w = a.width().max(b.width());
    // extend_to can only fail when narrowing
    (a.extend_to(w).unwrap(), b.extend_to(w).unwrap(), w)
}

/// Shift-add over the multiplier's magnitude bits followed by a subtraction
/// of the shifted multiplicand when the multiplier's sign bit is set.
/// Operands of unequal width are sign-extended to the wider one first.
pub fn sbmwc_multiply_reference(a: SignedWord, b: SignedWord) -> i64 {
    let (a, b, w) = common_width(a, b);
    let mc = a.value();
    let partial: i64 = (0..w - 1).filter(|&i| b.bit(i)).map(|i| mc << i).sum();
    if b.sign_bit() {
        partial - (mc << (w - 1))
    } else {
        partial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoothAction {
    Nop,
    AddM,
    SubM,
}

impl BoothAction {
    /// Signed weight of the action (+1, -1 or 0).
    pub fn weight(self) -> i64 {
        match self {
            BoothAction::Nop => 0,
            BoothAction::AddM => 1,
            BoothAction::SubM => -1,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            BoothAction::Nop => "NOP",
            BoothAction::AddM => "ADD",
            BoothAction::SubM => "SUB",
        }
    }
}

impl fmt::Display for BoothAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// Radix-2 Booth control table, indexed by `(current bit, previous bit)`.
///
/// Kept as data so verification runs can swap a row and confirm the fault is
/// caught.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecodeTable([BoothAction; 4]);

impl RecodeTable {
    pub const BOOTH: RecodeTable = RecodeTable([
        BoothAction::Nop,  // 00
        BoothAction::AddM, // 01
        BoothAction::SubM, // 10
        BoothAction::Nop,  // 11
    ]);

    #[inline]
    pub fn action(&self, curr: bool, prev: bool) -> BoothAction {
        self.0[((curr as usize) << 1) | prev as usize]
    }

    /// Returns a copy with one row replaced.
    pub fn with_row(mut self, curr: bool, prev: bool, action: BoothAction) -> Self {
        self.0[((curr as usize) << 1) | prev as usize] = action;
        self
    }
}

impl Default for RecodeTable {
    fn default() -> Self {
        Self::BOOTH
    }
}

/// Booth recoding of one multiplier bit pair; the previous bit of the first
/// (least significant) bit is 0.
#[inline]
pub fn booth_recode(curr: bool, prev: bool) -> BoothAction {
    RecodeTable::BOOTH.action(curr, prev)
}

/// Recodes every bit of `b`, LSb first.
pub fn booth_digits(b: SignedWord) -> Vec<BoothAction> {
    let mut prev = false;
    (0..b.width())
        .map(|i| {
            let curr = b.bit(i);
            let action = booth_recode(curr, prev);
            prev = curr;
            action
        })
        .collect()
}

/// One iteration of the classic add/subtract-then-shift Booth loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoothStep {
    pub action: BoothAction,
    /// Upper register (low `w` bits) after the add/subtract, before the shift.
    pub upper: u64,
    /// Product bits already shifted into the lower register (`step` bits,
    /// right aligned).
    pub retired: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoothTrace {
    pub width: u32,
    pub steps: Vec<BoothStep>,
    /// Combined `2w`-bit upper:lower register after the last shift.
    pub combined: u64,
    pub product: i64,
}

/// Classic Booth multiplication with a combined upper/lower register and an
/// arithmetic right shift per step. The upper register carries one guard bit
/// so `-M` of the most negative multiplicand cannot overflow.
pub fn booth_trace(a: SignedWord, b: SignedWord) -> BoothTrace {
    let (a, b, w) = common_width(a, b);
    let m = a.value();
    let mut upper: i64 = 0;
    let mut lower: u64 = b.pattern();
    let mut prev = false;
    let mut steps = Vec::with_capacity(w as usize);
    for step in 0..w {
        let curr = lower & 1 == 1;
        let action = booth_recode(curr, prev);
        upper += action.weight() * m;
        steps.push(BoothStep {
            action,
            upper: (upper as u64) & low_mask(w),
            retired: (lower & low_mask(w)) >> (w - step),
        });
        prev = curr;
        lower = (lower >> 1) | (((upper & 1) as u64) << (w - 1));
        upper >>= 1;
    }
    let product = (upper << w) + lower as i64;
    BoothTrace {
        width: w,
        steps,
        combined: (product as u64) & low_mask(2 * w),
        product,
    }
}

pub fn booth_multiply_reference(a: SignedWord, b: SignedWord) -> i64 {
    booth_trace(a, b).product
}

/// Cycle count of the bit-pair-decomposition (BISMO-style) bit-serial
/// approach without intra-MAC parallelism.
pub fn bismo_cycle_count(b_mc: u64, b_ml: u64, n_values: u64) -> u64 {
    b_mc * b_ml * n_values
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: i64, width: u32) -> SignedWord {
        SignedWord::new(v, width).unwrap()
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn to_bits_examples() {
        assert_eq!(w(6, 4).to_bits(BitOrder::LsbFirst), bits("0110"));
        assert_eq!(w(-2, 4).to_bits(BitOrder::MsbFirst), bits("1110"));
        assert_eq!(w(0, 1).to_bits(BitOrder::LsbFirst), bits("0"));
    }

    #[test]
    fn word_range_is_checked() {
        assert!(SignedWord::new(8, 4).is_err());
        assert!(SignedWord::new(-9, 4).is_err());
        assert!(SignedWord::new(-8, 4).is_ok());
        assert!(SignedWord::new(0, 0).is_err());
        assert!(SignedWord::new(0, 33).is_err());
        assert_eq!(w(-1, 1).value(), -1);
        assert_eq!(SignedWord::from_pattern(1, 1).unwrap().value(), -1);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_product(w(6, 4), w(-2, 4)), -12);
        assert_eq!(oracle_product(w(0, 8), w(127, 8)), 0);
        assert_eq!(oracle_product(w(-128, 8), w(-128, 8)), 16384);
    }

    #[test]
    fn unsigned_examples() {
        // LSb-first sequences of 0110 and 1110
        assert_eq!(
            unsigned_shift_add_multiply(&bits("0110"), &bits("0111")),
            84
        );
        assert_eq!(unsigned_shift_add_multiply(&bits("1011"), &bits("0000")), 0);
        assert_eq!(
            unsigned_shift_add_multiply(&bits("1111"), &bits("1111")),
            225
        );
    }

    #[test]
    fn sbmwc_examples() {
        assert_eq!(sbmwc_multiply_reference(w(6, 4), w(-2, 4)), -12);
        for width in 1..=8 {
            for a in SignedWord::min_value(width)..=SignedWord::max_value(width) {
                if width > 1 {
                    assert_eq!(sbmwc_multiply_reference(w(a, width), w(1, width)), a);
                }
            }
        }
    }

    #[test]
    fn sbmwc_exhaustive_width4() {
        let mut cases = 0;
        for a in -8..8 {
            for b in -8..8 {
                assert_eq!(sbmwc_multiply_reference(w(a, 4), w(b, 4)), a * b);
                cases += 1;
            }
        }
        assert_eq!(cases, 256);
    }

    #[test]
    fn recode_table() {
        assert_eq!(booth_recode(true, false), BoothAction::SubM);
        assert_eq!(booth_recode(false, true), BoothAction::AddM);
        assert_eq!(booth_recode(true, true), BoothAction::Nop);
        assert_eq!(booth_recode(false, false), BoothAction::Nop);
    }

    #[test]
    fn booth_trace_reproduces_worked_example() {
        let t = booth_trace(w(6, 4), w(-2, 4));
        let actions: Vec<_> = t.steps.iter().map(|s| s.action).collect();
        assert_eq!(
            actions,
            [
                BoothAction::Nop,
                BoothAction::SubM,
                BoothAction::Nop,
                BoothAction::Nop
            ]
        );
        let uppers: Vec<_> = t.steps.iter().map(|s| s.upper).collect();
        assert_eq!(uppers, [0b0000, 0b1010, 0b1101, 0b1110]);
        let retired: Vec<_> = t.steps.iter().map(|s| s.retired).collect();
        assert_eq!(retired, [0, 0b0, 0b00, 0b100]);
        assert_eq!(t.combined, 0b1111_0100);
        assert_eq!(t.product, -12);
    }

    #[test]
    fn booth_by_zero() {
        for a in -8..8 {
            assert_eq!(booth_multiply_reference(w(a, 4), w(0, 4)), 0);
        }
    }

    #[test]
    fn references_agree_exhaustively_up_to_8_bits() {
        for width in 1..=8u32 {
            let lo = SignedWord::min_value(width);
            let hi = SignedWord::max_value(width);
            for a in lo..=hi {
                for b in lo..=hi {
                    let (x, y) = (w(a, width), w(b, width));
                    let truth = oracle_product(x, y);
                    assert_eq!(sbmwc_multiply_reference(x, y), truth, "{x} * {y}");
                    assert_eq!(booth_multiply_reference(x, y), truth, "{x} * {y}");
                }
            }
        }
    }

    #[test]
    fn unequal_widths_are_sign_extended() {
        assert_eq!(sbmwc_multiply_reference(w(-3, 3), w(-100, 8)), 300);
        assert_eq!(booth_multiply_reference(w(-100, 8), w(-3, 3)), 300);
        assert_eq!(booth_multiply_reference(w(-1, 1), w(5, 4)), -5);
    }

    #[test]
    fn bismo_examples() {
        assert_eq!(bismo_cycle_count(2, 2, 1), 4);
        assert_eq!(bismo_cycle_count(1, 1, 77), 77);
        assert_eq!(bismo_cycle_count(16, 16, 1000), 256_000);
    }

    #[test]
    fn bismo_vs_streaming_at_single_value() {
        for b in 1..=16u64 {
            let bismo = bismo_cycle_count(b, b, 1);
            let streaming = 2 * b;
            assert_eq!(bismo > streaming, b > 2, "b = {b}");
            assert_eq!(bismo == streaming, b == 2 || b == 0, "b = {b}");
        }
    }

    fn word_strategy() -> impl Strategy<Value = SignedWord> {
        (1u32..=16).prop_flat_map(|width| {
            (SignedWord::min_value(width)..=SignedWord::max_value(width))
                .prop_map(move |v| SignedWord::new(v, width).unwrap())
        })
    }

    fn pair_strategy() -> impl Strategy<Value = (SignedWord, SignedWord)> {
        (1u32..=16).prop_flat_map(|width| {
            let r = SignedWord::min_value(width)..=SignedWord::max_value(width);
            (r.clone(), r).prop_map(move |(a, b)| (w(a, width), w(b, width)))
        })
    }

    proptest! {
        #[test]
        fn bits_round_trip(word in word_strategy(), msb in any::<bool>()) {
            let order = if msb { BitOrder::MsbFirst } else { BitOrder::LsbFirst };
            let back = SignedWord::from_bits(&word.to_bits(order), order).unwrap();
            prop_assert_eq!(back, word);
        }

        #[test]
        fn booth_digit_weights_sum_to_product((a, b) in pair_strategy()) {
            let sum: i64 = booth_digits(b)
                .iter()
                .enumerate()
                .map(|(i, d)| d.weight() * (a.value() << i))
                .sum();
            prop_assert_eq!(sum, oracle_product(a, b));
        }

        #[test]
        fn booth_reference_random_16_bit(a in -32768i64..32768, b in -32768i64..32768) {
            prop_assert_eq!(booth_multiply_reference(w(a, 16), w(b, 16)), a * b);
            prop_assert_eq!(sbmwc_multiply_reference(w(a, 16), w(b, 16)), a * b);
        }
    }
}
