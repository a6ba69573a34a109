//! Posit bit-pattern codec (es = 2).
//!
//! A posit word of width `n` holds, after the sign bit, a run-length encoded
//! regime, up to two exponent bits and a fraction. Reading order matters:
//! the word is conceptually extended with infinitely many zero bits past its
//! LSB, and regime/exponent/fraction are consumed MSB-first from that stream,
//! so exponent bits cut off by a long regime read as zero. Negative words
//! store the two's complement of their absolute pattern, which makes the
//! signed integer order of bit patterns coincide with numeric order.

use std::fmt;
use thiserror::Error;

/// Exponent field width fixed by the format.
pub const ES: u32 = 2;

/// An `n`-bit posit bit pattern, `4 <= n <= 64`, packed LSB-aligned.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PositWord {
    bits: u64,
    width: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("posit width {0} out of range (4..=64)")]
    Width(u32),
    #[error("bit pattern {bits:#x} does not fit in {width} bits")]
    Bits { bits: u64, width: u32 },
    #[error("cannot parse {text:?} as a {width}-bit posit pattern")]
    Parse { text: String, width: u32 },
}

impl PositWord {
    pub fn new(bits: u64, width: u32) -> Result<Self, WordError> {
        if !(4..=64).contains(&width) {
            return Err(WordError::Width(width));
        }
        if width < 64 && bits >> width != 0 {
            return Err(WordError::Bits { bits, width });
        }
        Ok(PositWord { bits, width })
    }

    pub fn zero(width: u32) -> Self {
        PositWord::new(0, width).expect("valid width")
    }

    /// Not-a-Real: sign bit set, everything else clear.
    pub fn nar(width: u32) -> Self {
        PositWord::new(1 << (width - 1), width).expect("valid width")
    }

    /// Largest positive pattern `0111...1`.
    pub fn maxpos(width: u32) -> Self {
        PositWord::new((1 << (width - 1)) - 1, width).expect("valid width")
    }

    /// Smallest positive pattern `000...01`.
    pub fn minpos(width: u32) -> Self {
        PositWord::new(1, width).expect("valid width")
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn is_nar(self) -> bool {
        self.bits == 1 << (self.width - 1)
    }

    fn mask(width: u32) -> u64 {
        if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        }
    }

    /// The pattern reinterpreted as a signed two's-complement integer.
    /// Posit values are ordered exactly like these integers.
    pub fn as_signed(self) -> i64 {
        let shift = 64 - self.width;
        ((self.bits << shift) as i64) >> shift
    }

    /// Arithmetic negation, which for posits is the two's complement of the
    /// pattern. Zero and NaR map to themselves.
    pub fn negate(self) -> Self {
        PositWord {
            bits: self.bits.wrapping_neg() & Self::mask(self.width),
            width: self.width,
        }
    }

    pub fn to_binary_string(self) -> String {
        format!("{:0width$b}", self.bits, width = self.width as usize)
    }

    pub fn to_hex_string(self) -> String {
        format!(
            "{:0width$x}",
            self.bits,
            width = self.width.div_ceil(4) as usize
        )
    }

    /// Parses a pattern written as binary (`0b...` or exactly `width` chars of
    /// `[01]`), hexadecimal (`0x...`) or an unsigned decimal integer.
    pub fn parse(text: &str, width: u32) -> Result<Self, WordError> {
        let parse_err = || WordError::Parse {
            text: text.to_string(),
            width,
        };
        let bits = if let Some(b) = text.strip_prefix("0b").or_else(|| text.strip_prefix("0B")) {
            u64::from_str_radix(b, 2).map_err(|_| parse_err())?
        } else if let Some(h) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            u64::from_str_radix(h, 16).map_err(|_| parse_err())?
        } else if text.len() == width as usize && text.bytes().all(|b| b == b'0' || b == b'1') {
            u64::from_str_radix(text, 2).map_err(|_| parse_err())?
        } else {
            text.parse::<u64>().map_err(|_| parse_err())?
        };
        PositWord::new(bits, width)
    }
}

impl fmt::Debug for PositWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PositWord({}, n={})",
            self.to_binary_string(),
            self.width
        )
    }
}

impl fmt::Display for PositWord {
    /// Displays the raw pattern, the least ambiguous form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary_string())
    }
}

/// Fields of a finite nonzero posit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalPosit {
    /// True for negative values. The remaining fields describe `|value|`.
    pub sign: bool,
    /// Regime value `k`: for a run of `l` ones `k = l - 1`, for `l` zeros
    /// `k = -l`.
    pub regime: i32,
    /// Exponent `e` in `0..4`; bits truncated by the regime read as zero.
    pub exponent: u8,
    /// Fraction bits as stored, MSB-aligned to `frac_len`.
    pub frac: u64,
    pub frac_len: u32,
    /// Width of the word the fields came from.
    pub width: u32,
}

impl NormalPosit {
    /// Number of fractional bits in the fixed-width significand register,
    /// `n - 5` (the worst-case fraction length of the format).
    pub fn significand_frac_bits(&self) -> u32 {
        self.width.saturating_sub(5)
    }

    /// The significand `1 + f` as a fixed-point integer with
    /// [`significand_frac_bits`](Self::significand_frac_bits) fractional bits,
    /// zero-padded regardless of the actual fraction length.
    pub fn significand(&self) -> u64 {
        let sb = self.significand_frac_bits();
        (1u64 << sb) | (self.frac << (sb - self.frac_len))
    }

    /// Combined power-of-two scale `4k + e` of `|value|`.
    pub fn scale_factor(&self) -> i32 {
        crate::scale::combine(self.regime, self.exponent)
    }
}

/// Decode result: the three pattern classes of the format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodedPosit {
    Zero,
    NaR,
    Normal(NormalPosit),
}

impl DecodedPosit {
    pub fn normal(&self) -> Option<&NormalPosit> {
        match self {
            DecodedPosit::Normal(n) => Some(n),
            _ => None,
        }
    }
}

/// Splits a word into sign/regime/exponent/fraction. Total over all inputs.
pub fn decode(word: PositWord) -> DecodedPosit {
    if word.is_zero() {
        return DecodedPosit::Zero;
    }
    if word.is_nar() {
        return DecodedPosit::NaR;
    }
    let n = word.width();
    let sign = word.bits() >> (n - 1) == 1;
    // Work on the absolute pattern; negatives are stored two's complemented.
    let mag = if sign {
        word.negate().bits()
    } else {
        word.bits()
    };

    // Regime: run of identical bits after the sign, stopped by a complement
    // bit or the end of the word.
    let body_len = n - 1;
    let first = (mag >> (body_len - 1)) & 1;
    let mut run = 1u32;
    while run < body_len && (mag >> (body_len - 1 - run)) & 1 == first {
        run += 1;
    }
    let regime = if first == 1 {
        run as i32 - 1
    } else {
        -(run as i32)
    };
    // Sign, run, and the terminator (absent if the run hits the end).
    let consumed = (1 + run + 1).min(n);

    let rem_len = n - consumed;
    let exponent = match rem_len {
        0 => 0,
        1 => ((mag & 1) << 1) as u8,
        _ => ((mag >> (rem_len - 2)) & 3) as u8,
    };
    let frac_len = rem_len.saturating_sub(ES);
    let frac = if frac_len == 0 {
        0
    } else {
        mag & ((1u64 << frac_len) - 1)
    };

    DecodedPosit::Normal(NormalPosit {
        sign,
        regime,
        exponent,
        frac,
        frac_len,
        width: n,
    })
}

/// Assembles and rounds a posit from its fields.
///
/// `frac` holds `frac_len` fraction bits of the normalized significand
/// `1.frac...`; `round` is the next lower bit and `sticky` the OR of
/// everything below it. The word is built at extended precision
/// (`sign | regime | exponent | fraction | round | sticky`) and cut to `n`
/// bits with round-to-nearest, ties to the even bit pattern. Because posit
/// patterns are ordered like integers, rounding up is a plain increment and
/// a fraction carry ripples into exponent and regime on its own. Values
/// beyond the dynamic range clamp to maxpos/minpos and never round to zero
/// or NaR.
#[allow(clippy::too_many_arguments)]
pub fn encode_round(
    sign: bool,
    regime: i32,
    exponent: u8,
    frac: u64,
    frac_len: u32,
    round: bool,
    sticky: bool,
    width: u32,
) -> PositWord {
    let n = width;
    debug_assert!((4..=64).contains(&n));
    debug_assert!(exponent < 4);
    debug_assert!(frac_len == 0 || frac >> frac_len.min(63) == 0 || frac_len >= 64);
    let finish = |bits: u64| {
        let word = PositWord::new(bits, n).expect("pattern fits");
        if sign {
            word.negate()
        } else {
            word
        }
    };

    // Saturation: |k| at or past the end of the regime field means the value
    // lies at or beyond maxpos (respectively below the gap above zero).
    if regime >= n as i32 - 2 {
        return finish(PositWord::maxpos(n).bits());
    }
    if regime < -(n as i32 - 2) {
        return finish(PositWord::minpos(n).bits());
    }

    let (regime_bits, regime_len): (u128, u32) = if regime >= 0 {
        // k+1 ones then a zero terminator.
        (
            (((1u128 << (regime as u32 + 1)) - 1) << 1),
            regime as u32 + 2,
        )
    } else {
        // -k zeros then a one terminator.
        (1, (-regime) as u32 + 1)
    };

    let mut ext: u128 = regime_bits;
    ext = (ext << ES) | exponent as u128;
    ext = (ext << frac_len) | frac as u128;
    ext = (ext << 1) | round as u128;
    ext = (ext << 1) | sticky as u128;
    // Sign bit (zero) on top.
    let total_len = 1 + regime_len + ES + frac_len + 2;
    debug_assert!(total_len <= 128);

    let (kept, round_eff, sticky_eff) = if total_len >= n {
        let cut = total_len - n;
        if cut == 0 {
            (ext, false, false)
        } else {
            let kept = ext >> cut;
            let round_eff = (ext >> (cut - 1)) & 1 == 1;
            let below_mask = (1u128 << (cut - 1)) - 1;
            (kept, round_eff, ext & below_mask != 0)
        }
    } else {
        // Fewer significant bits than the word: the tail is exactly zero.
        (ext << (n - total_len), false, false)
    };

    let mut bits = kept as u64;
    if round_eff && (sticky_eff || bits & 1 == 1) {
        bits += 1;
    }
    debug_assert!(bits <= PositWord::maxpos(n).bits());
    finish(bits)
}

/// Re-encodes decoded fields without any rounding; inverse of [`decode`] for
/// `Normal` inputs.
pub fn encode(fields: &NormalPosit) -> PositWord {
    encode_round(
        fields.sign,
        fields.regime,
        fields.exponent,
        fields.frac,
        fields.frac_len,
        false,
        false,
        fields.width,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(text: &str, n: u32) -> PositWord {
        PositWord::parse(text, n).unwrap()
    }

    #[test]
    fn special_patterns() {
        assert_eq!(decode(PositWord::zero(10)), DecodedPosit::Zero);
        assert_eq!(decode(PositWord::nar(10)), DecodedPosit::NaR);
        assert!(PositWord::nar(10).is_nar());
        assert_eq!(PositWord::nar(10).bits(), 0b1000000000);
        assert_eq!(PositWord::maxpos(8).bits(), 0x7f);
        assert_eq!(PositWord::minpos(8).bits(), 0x01);
    }

    #[test]
    fn decode_example_dividend() {
        // 0 01 10 10111: one-step negative regime, e=2, f=0.10111.
        let d = decode(word("0011010111", 10));
        let f = d.normal().unwrap();
        assert!(!f.sign);
        assert_eq!(f.regime, -1);
        assert_eq!(f.exponent, 2);
        assert_eq!(f.frac, 0b10111);
        assert_eq!(f.frac_len, 5);
        assert_eq!(f.significand(), 0b110111); // 1.10111 = 55/32
        assert_eq!(f.scale_factor(), -2);
    }

    #[test]
    fn decode_example_divisors() {
        let d1 = decode(word("0001001100", 10));
        let f1 = d1.normal().unwrap();
        assert_eq!((f1.regime, f1.exponent), (-2, 0));
        assert_eq!((f1.frac, f1.frac_len), (0b1100, 4));
        assert_eq!(f1.significand(), 0b111000); // 1.75
        assert_eq!(f1.scale_factor(), -8);

        let d2 = decode(word("0000100110", 10));
        let f2 = d2.normal().unwrap();
        assert_eq!((f2.regime, f2.exponent), (-3, 0));
        assert_eq!((f2.frac, f2.frac_len), (0b110, 3));
        assert_eq!(f2.significand(), 0b111000);
        assert_eq!(f2.scale_factor(), -12);
    }

    #[test]
    fn decode_negative_is_twos_complement() {
        let pos = word("0011010111", 10);
        let neg = pos.negate();
        let f = decode(neg);
        let f = f.normal().unwrap();
        assert!(f.sign);
        assert_eq!(f.regime, -1);
        assert_eq!(f.exponent, 2);
        assert_eq!(f.frac, 0b10111);
    }

    #[test]
    fn exponent_bits_cut_by_regime_read_as_zero() {
        // n=8: 0 111110 1 -> regime run of five ones (k=4), terminator, one
        // exponent bit left which is the HIGH bit of e.
        let f = decode(word("01111101", 8));
        let f = f.normal().unwrap();
        assert_eq!(f.regime, 4);
        assert_eq!(f.exponent, 0b10);
        assert_eq!(f.frac_len, 0);

        // Regime runs to the end of the word: no exponent bits at all.
        let f = decode(word("01111111", 8));
        let f = f.normal().unwrap();
        assert_eq!(f.regime, 6);
        assert_eq!(f.exponent, 0);
    }

    #[test]
    fn encode_round_fraction_shift_examples() {
        // Fraction survives after a one-bit shift; shifted-out bit is zero.
        assert_eq!(
            encode_round(false, 1, 1, 0b11110, 5, false, true, 10),
            word("0110011111", 10)
        );
        // Two-bit shift: round bit lands on 1, carry ripples through the
        // fraction into the exponent.
        assert_eq!(
            encode_round(false, 2, 1, 0b111, 3, true, false, 10),
            word("0111010000", 10)
        );
        // Plain 1.0.
        assert_eq!(
            encode_round(false, 0, 0, 0, 11, false, false, 16),
            word("0100000000000000", 16)
        );
    }

    #[test]
    fn encode_round_tie_goes_to_even_pattern() {
        // kept lsb 0, round 1, nothing below: stay (even).
        let w = encode_round(false, 2, 0, 0b01, 2, false, false, 8);
        assert_eq!(w, word("01110000", 8));
        // same value expressed with the tie at the cut: 1.01 at k=2 keeps one
        // fraction bit, round bit is the dropped 1.
        let tie = encode_round(false, 2, 0, 0b010, 3, false, false, 8);
        assert_eq!(tie, word("01110000", 8));
        // odd kept lsb rounds away: 448 is halfway between 384 (0111 00 1)
        // and 512 (0111 01 0); the even pattern wins.
        let up = encode_round(false, 2, 0, 0b110, 3, false, false, 8);
        assert_eq!(up, word("01110010", 8));
    }

    #[test]
    fn encode_round_saturates_without_wrapping() {
        assert_eq!(
            encode_round(false, 40, 3, 0, 0, true, true, 8),
            PositWord::maxpos(8)
        );
        assert_eq!(
            encode_round(false, -40, 0, 0, 0, false, false, 8),
            PositWord::minpos(8)
        );
        assert_eq!(
            encode_round(true, 40, 0, 0, 0, false, false, 8),
            PositWord::maxpos(8).negate()
        );
        // Just inside the regime range still assembles normally and may round
        // up into maxpos, never into NaR.
        let w = encode_round(false, 5, 3, 0b111, 3, true, true, 8);
        assert_eq!(w, PositWord::maxpos(8));
    }

    #[test]
    fn round_trip_exhaustive_small_widths() {
        for n in [4u32, 8, 10, 12, 16] {
            for bits in 0..(1u64 << n) {
                let w = PositWord::new(bits, n).unwrap();
                match decode(w) {
                    DecodedPosit::Zero => assert!(w.is_zero()),
                    DecodedPosit::NaR => assert!(w.is_nar()),
                    DecodedPosit::Normal(f) => {
                        assert_eq!(encode(&f), w, "round trip failed for {w:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn parse_accepts_binary_hex_decimal() {
        assert_eq!(word("0011010111", 10).bits(), 0xd7);
        assert_eq!(word("0xd7", 10).bits(), 0xd7);
        assert_eq!(word("215", 10).bits(), 0xd7);
        assert_eq!(word("0b11010111", 10).bits(), 0xd7);
        assert!(PositWord::parse("10", 4).is_ok()); // decimal 10, not binary
        assert_eq!(PositWord::parse("1010", 4).unwrap().bits(), 0b1010);
        assert!(PositWord::parse("zzz", 8).is_err());
        assert!(PositWord::parse("300", 8).is_err());
    }
}
