use serde::{Deserialize, Serialize};

use crate::bitmath::{low_mask, BitOrder, SignedWord};
use crate::error::ProtocolViolation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShiftDirection {
    /// Emits the MSb first; feeds multiplicand (vertical) inputs.
    MsbFirstShiftLeft,
    /// Emits the LSb first; feeds multiplier (horizontal) inputs.
    LsbFirstShiftRight,
}

impl ShiftDirection {
    pub fn order(self) -> BitOrder {
        match self {
            ShiftDirection::MsbFirstShiftLeft => BitOrder::MsbFirst,
            ShiftDirection::LsbFirstShiftRight => BitOrder::LsbFirst,
        }
    }
}

/// Parallel-to-serial converter: holds one word and shifts a bit out per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct P2s {
    hold: u64,
    width: u32,
    remaining: u32,
    direction: ShiftDirection,
}

impl P2s {
    pub fn new(direction: ShiftDirection) -> Self {
        Self {
            hold: 0,
            width: 0,
            remaining: 0,
            direction,
        }
    }

    pub fn direction(&self) -> ShiftDirection {
        self.direction
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    /// True while a loaded word still has bits to emit.
    pub fn valid(&self) -> bool {
        self.remaining > 0
    }

    pub fn hold(&self) -> u64 {
        self.hold
    }

    /// Latches a word. Only legal on a word boundary.
    pub fn load(&mut self, word: SignedWord) -> Result<(), ProtocolViolation> {
        if self.remaining > 0 {
            return Err(ProtocolViolation::MidWordLoad {
                remaining: self.remaining,
            });
        }
        self.hold = word.pattern();
        self.width = word.width();
        self.remaining = word.width();
        Ok(())
    }

    /// Emits one bit (0 when idle) and shifts the hold register.
    #[inline]
    pub fn step(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        match self.direction {
            ShiftDirection::MsbFirstShiftLeft => {
                let bit = (self.hold >> (self.width - 1)) & 1 == 1;
                self.hold = (self.hold << 1) & low_mask(self.width);
                bit
            }
            ShiftDirection::LsbFirstShiftRight => {
                let bit = self.hold & 1 == 1;
                self.hold >>= 1;
                bit
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emit(p: &mut P2s, n: u32) -> Vec<bool> {
        (0..n).map(|_| p.step()).collect()
    }

    #[test]
    fn msb_first_example() {
        let mut p = P2s::new(ShiftDirection::MsbFirstShiftLeft);
        p.load(SignedWord::new(-2, 4).unwrap()).unwrap();
        assert_eq!(emit(&mut p, 4), [true, true, true, false]);
        assert!(!p.valid());
        assert!(!p.step());
    }

    #[test]
    fn lsb_first_example() {
        let mut p = P2s::new(ShiftDirection::LsbFirstShiftRight);
        p.load(SignedWord::new(6, 4).unwrap()).unwrap();
        assert_eq!(emit(&mut p, 4), [false, true, true, false]);
    }

    #[test]
    fn mid_word_load_is_rejected() {
        let mut p = P2s::new(ShiftDirection::LsbFirstShiftRight);
        p.load(SignedWord::new(3, 4).unwrap()).unwrap();
        p.step();
        assert_eq!(
            p.load(SignedWord::new(1, 4).unwrap()),
            Err(ProtocolViolation::MidWordLoad { remaining: 3 })
        );
        emit(&mut p, 3);
        assert!(p.load(SignedWord::new(1, 4).unwrap()).is_ok());
    }

    proptest! {
        #[test]
        fn emits_to_bits(v in -32768i64..32768, msb in any::<bool>()) {
            let dir = if msb { ShiftDirection::MsbFirstShiftLeft } else { ShiftDirection::LsbFirstShiftRight };
            let word = SignedWord::new(v, 16).unwrap();
            let mut p = P2s::new(dir);
            p.load(word).unwrap();
            prop_assert_eq!(emit(&mut p, 16), word.to_bits(dir.order()));
        }
    }
}
