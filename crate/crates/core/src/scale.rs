//! Power-of-two scale arithmetic for quotients.
//!
//! A posit's magnitude is `2^(4k + e) * (1 + f)`. Division subtracts the
//! combined scales and the result splits back into a regime/exponent pair,
//! with the exponent taken as the nonnegative residue mod 4 (the two LSBs of
//! the difference) and the regime as the floored quotient. Exactly the same
//! values fall out of two's-complement arithmetic on a concatenated `k || e`
//! register, which is how hardware does it.

/// Combined scale `4k + e`.
pub fn combine(regime: i32, exponent: u8) -> i32 {
    debug_assert!(exponent < 4);
    4 * regime + exponent as i32
}

/// Splits `sf_x - sf_d - normalize_decrement` into the quotient's
/// `(regime, exponent)`.
///
/// `normalize_decrement` is 1 when the significand quotient came out below
/// one and was shifted left.
pub fn subtract_split(sf_x: i32, sf_d: i32, normalize_decrement: u32) -> (i32, u8) {
    let t = sf_x - sf_d - normalize_decrement as i32;
    (t.div_euclid(4), t.rem_euclid(4) as u8)
}
