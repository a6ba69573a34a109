//! Operand scaling for the radix-4 divider with divisor-independent digit
//! selection.
//!
//! Radix-4 selection normally needs comparison constants that depend on the
//! divisor. Multiplying both operands by a small constant `M` chosen from
//! the top fraction bits of the divisor squeezes the scaled divisor
//! `z = M * (d / 2)` into `[63/64, 9/8]`, narrow enough for one constant set
//! to serve every divisor. Each `M` is a one- or two-term sum of powers of
//! two on top of 1, so the hardware cost is at most two shifted adds per
//! operand, and the quotient is untouched because both operands scale alike.

/// A scaling constant `M = m16 / 16`, with its shift-add decomposition
/// `M = 1 + sum(2^-s for s in shifts)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prescale {
    pub m16: i128,
    pub shifts: &'static [u32],
}

/// Table indexed by the three fraction bits of the divisor significand just
/// below its leading bit.
#[rustfmt::skip]
const TABLE: [Prescale; 8] = [
    Prescale { m16: 32, shifts: &[1, 1] }, // d in [1, 9/8):    M = 2
    Prescale { m16: 28, shifts: &[2, 1] }, // d in [9/8, 5/4):  M = 7/4
    Prescale { m16: 26, shifts: &[1, 3] }, // d in [5/4, 11/8): M = 13/8
    Prescale { m16: 24, shifts: &[1] },    // d in [11/8, 3/2): M = 3/2
    Prescale { m16: 22, shifts: &[2, 3] }, // d in [3/2, 13/8): M = 11/8
    Prescale { m16: 20, shifts: &[2] },    // d in [13/8, 7/4): M = 5/4
    Prescale { m16: 18, shifts: &[3] },    // d in [7/4, 15/8): M = 9/8
    Prescale { m16: 18, shifts: &[3] },    // d in [15/8, 2):   M = 9/8
];

/// Picks the scaling constant from a divisor significand `1 <= d < 2` held
/// as `d_sig / 2^sig_frac_bits`.
pub fn prescale_for(d_sig: i128, sig_frac_bits: u32) -> Prescale {
    debug_assert!(sig_frac_bits >= 3);
    debug_assert!((1 << sig_frac_bits..2 << sig_frac_bits).contains(&d_sig));
    TABLE[((d_sig >> (sig_frac_bits - 3)) & 7) as usize]
}

impl Prescale {
    /// Multiplies a fixed-point value by `M` with the shift-add form the
    /// datapath would use. Exact: callers place operands on a grid with
    /// enough trailing zeros for every shift.
    pub fn apply(&self, x: i128) -> i128 {
        let mut acc = x;
        for &s in self.shifts {
            debug_assert!(x.trailing_zeros() >= s, "shift drops nonzero bits");
            acc += x >> s;
        }
        debug_assert_eq!(acc * 16, x * self.m16);
        acc
    }
}
