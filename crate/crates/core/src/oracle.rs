//! Exact rational reference for posit division.
//!
//! Every finite posit is a rational number, so a division can be checked by
//! forming the exact quotient with arbitrary-precision rationals and rounding
//! it to the target width. Rounding here deliberately avoids the bit-assembly
//! path of [`crate::codec::encode_round`]: it exploits only the fact that
//! posit patterns are ordered like integers, and bisects the positive pattern
//! range with exact comparisons.
//!
//! The rounding rule is round-to-nearest-even applied to the unbounded binary
//! encoding, not to the real value: between two adjacent `n`-bit patterns the
//! decision boundary is the value of the single `n+1`-bit pattern interleaved
//! between them (the lower pattern with a `1` appended). Wherever both
//! neighbors carry a full fraction field that boundary is the arithmetic
//! midpoint, but where the regime squeezes out exponent or fraction bits it
//! sits at the tapered position the format implies (e.g. between 2^32 and
//! 2^34 the boundary is 2^33, not 2.5*2^32). An exact hit on the boundary
//! goes to the pattern with even LSB; magnitudes beyond the dynamic range
//! clamp to maxpos/minpos (never to zero or NaR).

use crate::codec::{decode, DecodedPosit, PositWord};
use num::{BigInt, BigRational, One, Signed, Zero};

/// Exact value of a decoded posit. `None` for NaR, which has no real value.
pub fn exact_value(p: &DecodedPosit) -> Option<BigRational> {
    let f = match p {
        DecodedPosit::Zero => return Some(BigRational::zero()),
        DecodedPosit::NaR => return None,
        DecodedPosit::Normal(f) => f,
    };
    let sf = f.scale_factor();
    // 1 + frac / 2^frac_len
    let denom = BigInt::one() << f.frac_len;
    let sig = BigRational::new(&denom + BigInt::from(f.frac), denom);
    let mut v = sig * pow2(sf);
    if f.sign {
        v = -v;
    }
    Some(v)
}

/// Exact value of a word; convenience over [`exact_value`].
pub fn value_of(word: PositWord) -> Option<BigRational> {
    exact_value(&decode(word))
}

fn pow2(exp: i32) -> BigRational {
    if exp >= 0 {
        BigRational::from_integer(BigInt::one() << exp as u32)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-exp) as u32)
    }
}

fn positive_pattern_value(bits: u64, width: u32) -> BigRational {
    let w = PositWord::new(bits, width).expect("pattern in range");
    value_of(w).expect("positive patterns are finite")
}

/// Value of a positive pattern, decoded arithmetically from raw bits. Unlike
/// [`positive_pattern_value`] this takes widths beyond the word type's limit,
/// which rounding needs: the midpoint between adjacent `n`-bit patterns is an
/// `n+1`-bit pattern, and `n` itself may be as large as 64.
fn positive_value(bits: u128, width: u32) -> BigRational {
    let body_len = width - 1;
    debug_assert!(bits >= 1 && bits < 1u128 << body_len);
    let leading = bits >> (body_len - 1) & 1;
    let mut run = 1;
    while run < body_len && bits >> (body_len - 1 - run) & 1 == leading {
        run += 1;
    }
    let regime = if leading == 1 {
        run as i32 - 1
    } else {
        -(run as i32)
    };
    // The terminator bit is consumed too, unless the run fills the body.
    let rest_len = body_len - (run + 1).min(body_len);
    let rest = bits & ((1u128 << rest_len) - 1);
    let exp_len = rest_len.min(2);
    // A cut-off low exponent bit reads as zero.
    let exponent = ((rest >> (rest_len - exp_len)) << (2 - exp_len)) as i32;
    let frac_len = rest_len - exp_len;
    let frac = rest & ((1u128 << frac_len) - 1);
    let denom = BigInt::one() << frac_len;
    let sig = BigRational::new(&denom + BigInt::from(frac), denom);
    sig * pow2(4 * regime + exponent)
}

/// Picks between adjacent positive patterns `lo` and `lo + 1` for a magnitude
/// known to satisfy value(lo) <= mag < value(lo + 1): nearest in encoding
/// space, i.e. compared against the interleaved one-bit-longer pattern, with
/// an exact hit going to the even pattern.
fn pick_neighbor(lo: u64, mag: &BigRational, width: u32) -> u64 {
    let boundary = positive_value((lo as u128) << 1 | 1, width + 1);
    match mag.cmp(&boundary) {
        std::cmp::Ordering::Less => lo,
        std::cmp::Ordering::Greater => lo + 1,
        // lo and lo + 1 differ in the last bit, so exactly one is even.
        std::cmp::Ordering::Equal => {
            if lo & 1 == 0 {
                lo
            } else {
                lo + 1
            }
        }
    }
}

/// Rounds an exact real to the nearest `width`-bit posit.
pub fn round_to_posit(v: &BigRational, width: u32) -> PositWord {
    if v.is_zero() {
        return PositWord::zero(width);
    }
    let negative = v.is_negative();
    let mag = v.abs();

    // Positive patterns 1 ..= 2^(n-1)-1 are monotonically increasing in
    // value. Find the largest pattern whose value does not exceed mag.
    let top = PositWord::maxpos(width).bits();
    if mag >= positive_pattern_value(top, width) {
        return signed(PositWord::maxpos(width), negative);
    }
    if mag <= positive_pattern_value(1, width) {
        return signed(PositWord::minpos(width), negative);
    }
    let (mut lo, mut hi) = (1u64, top);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if positive_pattern_value(mid, width) <= mag {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pick = pick_neighbor(lo, &mag, width);
    signed(
        PositWord::new(pick, width).expect("pattern in range"),
        negative,
    )
}

fn signed(word: PositWord, negative: bool) -> PositWord {
    if negative {
        word.negate()
    } else {
        word
    }
}

/// The reference with per-pattern values precomputed, for sweeps over small
/// widths where rounding would otherwise recompute the same values per pair.
/// Semantics are identical to [`divide_exact`].
pub struct CachedOracle {
    width: u32,
    /// Value per bit pattern; `None` only for NaR.
    values: Vec<Option<BigRational>>,
}

impl CachedOracle {
    pub fn new(width: u32) -> Self {
        assert!(width <= 20, "cache would be excessive; use divide_exact");
        let values = (0..1u64 << width)
            .map(|bits| value_of(PositWord::new(bits, width).unwrap()))
            .collect();
        CachedOracle { width, values }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn divide(&self, x: PositWord, d: PositWord) -> PositWord {
        let n = self.width;
        debug_assert!(x.width() == n && d.width() == n);
        if d.is_zero() || d.is_nar() || x.is_nar() {
            return PositWord::nar(n);
        }
        if x.is_zero() {
            return PositWord::zero(n);
        }
        let q = self.values[x.bits() as usize].as_ref().unwrap()
            / self.values[d.bits() as usize].as_ref().unwrap();
        self.round(&q)
    }

    /// Same search as [`round_to_posit`], against the cached values.
    pub fn round(&self, v: &BigRational) -> PositWord {
        let n = self.width;
        if v.is_zero() {
            return PositWord::zero(n);
        }
        let negative = v.is_negative();
        let mag = v.abs();
        let val = |bits: u64| self.values[bits as usize].as_ref().unwrap();
        let top = PositWord::maxpos(n).bits();
        if mag >= *val(top) {
            return signed(PositWord::maxpos(n), negative);
        }
        if mag <= *val(1) {
            return signed(PositWord::minpos(n), negative);
        }
        let (mut lo, mut hi) = (1u64, top);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if *val(mid) <= mag {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let pick = pick_neighbor(lo, &mag, n);
        signed(PositWord::new(pick, n).expect("pattern in range"), negative)
    }
}

/// Reference division: special cases first, then exact quotient and rounding.
pub fn divide_exact(x: PositWord, d: PositWord) -> PositWord {
    let n = x.width();
    debug_assert_eq!(n, d.width());
    let xv = decode(x);
    let dv = decode(d);
    if matches!(dv, DecodedPosit::Zero | DecodedPosit::NaR) || matches!(xv, DecodedPosit::NaR) {
        return PositWord::nar(n);
    }
    if matches!(xv, DecodedPosit::Zero) {
        return PositWord::zero(n);
    }
    let q = exact_value(&xv).unwrap() / exact_value(&dv).unwrap();
    round_to_posit(&q, n)
}
