//! Scalar abstractions shared by the simulator and the throughput model.
//!
//! Hardware registers are modelled on a signed machine integer wide enough to
//! hold the configured accumulator width ([`AccWord`]). The analytic model is
//! generic over [`PerfScalar`] so the same formulas can be evaluated exactly
//! (rationals) or approximately (floats).

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_rational::Ratio;
use num_traits::{PrimInt, Signed, ToPrimitive, WrappingAdd, WrappingSub};

/// Signed register word backing MAC accumulators.
pub trait AccWord:
    PrimInt
    + Signed
    + WrappingAdd
    + WrappingSub
    + Hash
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    const BITS: u32;

    /// Truncates `v` to the register type (two's-complement wrap).
    fn from_wide(v: i128) -> Self;

    fn to_wide(self) -> i128;

    /// Keeps the low `width` bits and sign-extends from bit `width - 1`.
    #[inline]
    fn wrap_to(self, width: u32) -> Self {
        debug_assert!(width >= 1 && width <= Self::BITS);
        let spare = (Self::BITS - width) as usize;
        if spare == 0 {
            self
        } else {
            (self << spare) >> spare
        }
    }

    /// Number of differing bits between two register values.
    #[inline]
    fn hamming(self, other: Self) -> u32 {
        (self ^ other).count_ones()
    }
}

macro_rules! impl_acc_word {
    ($t:ty) => {
        impl AccWord for $t {
            const BITS: u32 = <$t>::BITS;

            #[inline]
            fn from_wide(v: i128) -> Self {
                v as $t
            }

            #[inline]
            fn to_wide(self) -> i128 {
                self as i128
            }
        }
    };
}

impl_acc_word!(i32);
impl_acc_word!(i64);
impl_acc_word!(i128);

/// Exact rational used for throughput reporting.
pub type Rational = Ratio<i128>;

/// Number type the throughput model is evaluated in.
pub trait PerfScalar: Clone + PartialOrd + Debug + num_traits::Num + Send + Sync {
    /// Whether arithmetic in this type is free of rounding.
    const EXACT: bool;

    fn from_count(n: u64) -> Self;

    fn to_f64(&self) -> f64;
}

macro_rules! impl_perf_float {
    ($t:ty) => {
        impl PerfScalar for $t {
            const EXACT: bool = false;

            #[inline]
            fn from_count(n: u64) -> Self {
                n as $t
            }

            #[inline]
            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

macro_rules! impl_perf_ratio {
    ($t:ty) => {
        impl PerfScalar for Ratio<$t> {
            const EXACT: bool = true;

            #[inline]
            fn from_count(n: u64) -> Self {
                Ratio::from_integer(n as $t)
            }

            fn to_f64(&self) -> f64 {
                ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
            }
        }
    };
}

impl_perf_float!(f32);
impl_perf_float!(f64);
impl_perf_ratio!(i64);
impl_perf_ratio!(i128);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_sign_extends() {
        assert_eq!(0b0111i64.wrap_to(3), -1);
        assert_eq!(0b0011i64.wrap_to(3), 3);
        assert_eq!(0b0100i64.wrap_to(3), -4);
        assert_eq!((-5i64).wrap_to(64), -5);
        assert_eq!(((1i128 << 47) + 5).wrap_to(48), -(1i128 << 47) + 5);
    }

    #[test]
    fn hamming_counts_flipped_bits() {
        assert_eq!(0i64.hamming(-1), 64);
        assert_eq!(5i32.hamming(4), 1);
    }

    #[test]
    fn ratio_to_f64_is_correctly_rounded() {
        let r = Ratio::new(96i128, 5);
        assert_eq!(PerfScalar::to_f64(&r), 19.2);
    }
}
