//! On-the-fly conversion of signed-digit quotients.
//!
//! The iterations produce digits from a redundant set (they may be
//! negative), but the rounding step wants the plain binary quotient and the
//! quotient minus one ulp. Keeping both candidates and extending them one
//! digit at a time removes the final carry-propagating subtraction: appends
//! touch only the low digit position.
//!
//! With `Q(i)` the converted prefix and `QD(i) = Q(i) - r^-i`:
//!
//! * digit `q >= 0`: `Q` extends itself; `q >= 1` rebuilds `QD` from `Q`.
//! * digit `q < 0`: both candidates extend `QD`.
//!
//! While every digit so far is zero, `QD` would be negative; the register
//! then holds an unusable placeholder. That is harmless: the first nonzero
//! digit of these recurrences is always positive (the residual starts
//! positive), and a positive digit rewrites `QD` from `Q`, repairing it
//! before anything can read it.

use crate::qds::Radix;

/// Quotient conversion registers.
#[derive(Debug, Clone)]
pub struct OtfState {
    radix: Radix,
    /// Converted prefix, as the integer `q(i) * r^i`.
    q: u128,
    /// Converted prefix minus one ulp, same weighting.
    qd: u128,
    len: u32,
}

impl OtfState {
    pub fn new(radix: Radix) -> Self {
        OtfState {
            radix,
            q: 0,
            qd: 0,
            len: 0,
        }
    }

    /// Number of digits appended so far.
    pub fn digits(&self) -> u32 {
        self.len
    }

    /// Appends the next quotient digit.
    pub fn append(&mut self, digit: i32) {
        let r = self.radix.value() as i64;
        let d = digit as i64;
        debug_assert!(d.abs() < r, "digit {digit} outside the radix-{r} set");
        let (q, qd) = (self.q, self.qd);
        self.q = if d >= 0 {
            q * r as u128 + d as u128
        } else {
            qd * r as u128 + (r + d) as u128
        };
        self.qd = if d >= 1 {
            q * r as u128 + (d - 1) as u128
        } else {
            qd * r as u128 + (r - 1 + d) as u128
        };
        self.len += 1;
    }

    /// `q(i) * r^i`, valid whenever some digit was nonzero (the recurrences
    /// guarantee the running prefix never goes negative).
    pub fn quotient(&self) -> u128 {
        self.q
    }

    /// `(q(i) - r^-i) * r^i`, valid once a positive digit has been seen.
    pub fn quotient_minus_ulp(&self) -> u128 {
        self.qd
    }

    /// Picks the corrected quotient: a negative final residual means the
    /// digit string overshot by one ulp.
    pub fn finalize(&self, remainder_negative: bool) -> u128 {
        if remainder_negative {
            self.qd
        } else {
            self.q
        }
    }

    /// Binary rendering of a register at the current digit length, for
    /// traces.
    pub fn bits(&self, minus_ulp: bool) -> String {
        let width = (self.len * self.radix.log2()) as usize;
        let v = if minus_ulp { self.qd } else { self.q };
        format!("{v:0width$b}")
    }
}
