//! Partial-remainder arithmetic for the iterative dividers.
//!
//! Residuals live on a fixed-point grid with `fb` fractional bits and are
//! stored in a two's complement window of `fb + 5` bits: four integer bits
//! plus sign. The recurrences keep every residual inside `|w| <= bound * d`
//! with `d < 9/4`, so windowed (modular) arithmetic never loses information;
//! wrapping only discards bits that sign extension restores.
//!
//! Two storage forms share one interface. The non-redundant form keeps the
//! residual as a single word and steps through an ordinary subtraction. The
//! carry-save form keeps a sum/carry pair and steps through a single 3:2
//! compressor, which is what lets a hardware iteration avoid a full-width
//! carry chain; digit selection then reads a short truncated estimate of the
//! pair, and the final sign/zero flags come from a logarithmic carry
//! lookahead rather than an assimilating add.

/// Storage form of the partial remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualForm {
    /// Single two's complement word, updated with a full subtraction.
    NonRedundant,
    /// Sum/carry pair, updated with a 3:2 compressor.
    CarrySave,
}

/// Sign and zero information extracted from the final residual without an
/// assimilating addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualFlags {
    /// The residual is strictly negative.
    pub negative: bool,
    /// The residual is exactly zero.
    pub zero: bool,
    /// The residual plus the divisor is exactly zero, i.e. `w == -d`. This
    /// happens when the last digit overshot an exact quotient, and it matters
    /// because the digit correction then lands on an exact result.
    pub zero_after_add: bool,
}

impl ResidualFlags {
    /// True when the residual that the digit correction produces is zero:
    /// either the raw residual is zero, or it is negative and equals `-d` so
    /// that the correction `w + d` cancels exactly.
    pub fn corrected_zero(&self) -> bool {
        self.zero || (self.negative && self.zero_after_add)
    }
}

/// A windowed fixed-point partial remainder.
#[derive(Debug, Clone)]
pub struct Residual {
    form: ResidualForm,
    /// Fractional bits of the grid; integer `v` represents `v / 2^fb`.
    fb: u32,
    /// Window width in bits (always `fb + 5`).
    win: u32,
    ws: u128,
    wc: u128,
}

/// Integer bits (including sign) carried above the fraction point.
pub const INT_BITS: u32 = 5;

impl Residual {
    /// Creates a residual holding `value / 2^fb`.
    pub fn new(form: ResidualForm, fb: u32, value: i128) -> Self {
        let win = fb + INT_BITS;
        assert!(win <= 120, "window exceeds the supported width");
        assert!(
            value.abs() < 1i128 << (win - 1),
            "initial value outside the window"
        );
        Residual {
            form,
            fb,
            win,
            ws: (value as u128) & mask(win),
            wc: 0,
        }
    }

    /// Reassembles a residual from raw window words, e.g. as recorded in a
    /// trace. Only the wrapped sum of the pair is meaningful.
    pub fn from_components(form: ResidualForm, fb: u32, ws: u128, wc: u128) -> Self {
        let win = fb + INT_BITS;
        assert!(win <= 120, "window exceeds the supported width");
        Residual {
            form,
            fb,
            win,
            ws: ws & mask(win),
            wc: wc & mask(win),
        }
    }

    pub fn form(&self) -> ResidualForm {
        self.form
    }

    pub fn fraction_bits(&self) -> u32 {
        self.fb
    }

    pub fn window_bits(&self) -> u32 {
        self.win
    }

    /// Raw window words `(ws, wc)`. The carry word is zero in non-redundant
    /// form; only the wrapped sum of the pair carries meaning.
    pub fn components(&self) -> (u128, u128) {
        (self.ws, self.wc)
    }

    /// Assimilated value on the grid: `wrap(ws + wc)` read as a signed
    /// window-width integer.
    pub fn value(&self) -> i128 {
        sign_extend(self.ws.wrapping_add(self.wc) & mask(self.win), self.win)
    }

    /// One recurrence step: `w := radix * w - digit * d`, with
    /// `radix = 2^radix_log2` and `d = divisor / 2^fb`.
    ///
    /// In carry-save form the update is a single 3:2 compression of the two
    /// shifted residual words and the (possibly complemented) divisor
    /// multiple, so no carry propagates beyond one position.
    pub fn step(&mut self, radix_log2: u32, digit: i32, divisor: i128) {
        let m = mask(self.win);
        let a = (self.ws << radix_log2) & m;
        let b = (self.wc << radix_log2) & m;
        let c = (-(digit as i128)).wrapping_mul(divisor) as u128 & m;
        match self.form {
            ResidualForm::NonRedundant => {
                self.ws = a.wrapping_add(c) & m;
                self.wc = 0;
            }
            ResidualForm::CarrySave => {
                let (s, cy) = compress_3_2(a, b, c, self.win);
                self.ws = s;
                self.wc = cy;
            }
        }
    }

    /// Truncated estimate of the shifted residual, as used by digit
    /// selection: both words are shifted left by `shift`, truncated to `t`
    /// fractional bits (toward minus infinity, per word), added, and the sum
    /// is wrapped to `t + 4` bits. The result is an integer in units of
    /// `2^-t`.
    ///
    /// The per-word truncation makes the estimate at most one `2^-t` below
    /// the true truncated value, and the recurrences bound the true shifted
    /// residual well inside the signed `t + 4` bit range, so the wrap is
    /// lossless.
    pub fn estimate(&self, shift: u32, t: u32) -> i64 {
        debug_assert!(t <= self.fb);
        let m = mask(self.win);
        let drop = self.fb - t;
        let a = ((self.ws << shift) & m) >> drop;
        let b = ((self.wc << shift) & m) >> drop;
        let est_bits = t + 4;
        sign_extend(a.wrapping_add(b) & mask(est_bits), est_bits) as i64
    }

    /// Whether `|w| * bound_den <= bound_num * d` holds, the containment
    /// invariant of the recurrence (`bound = 1` for radix 2, `2/3` for
    /// radix 4).
    pub fn respects_bound(&self, bound_num: i128, bound_den: i128, divisor: i128) -> bool {
        self.value().abs() * bound_den <= bound_num * divisor
    }

    /// Final sign/zero flags computed by carry lookahead over the sum/carry
    /// pair, without assimilating the residual.
    pub fn flags(&self, divisor: i128) -> ResidualFlags {
        let negative = lookahead_sign(self.ws, self.wc, self.win);
        let zero = lookahead_zero(self.ws, self.wc, self.win);
        // w + d == 0 is detected on a freshly compressed triple (ws, wc, d).
        let d = divisor as u128 & mask(self.win);
        let (s, cy) = compress_3_2(self.ws, self.wc, d, self.win);
        let zero_after_add = lookahead_zero(s, cy, self.win);
        ResidualFlags {
            negative,
            zero,
            zero_after_add,
        }
    }
}

fn mask(bits: u32) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

fn sign_extend(word: u128, bits: u32) -> i128 {
    let shift = 128 - bits;
    ((word << shift) as i128) >> shift
}

/// 3:2 carry-save compression within a window: returns `(sum, carry)` with
/// `sum + carry == a + b + c (mod 2^win)`.
fn compress_3_2(a: u128, b: u128, c: u128, win: u32) -> (u128, u128) {
    let s = a ^ b ^ c;
    let cy = ((a & b) | (a & c) | (b & c)) << 1;
    (s & mask(win), cy & mask(win))
}

/// Carry out of every bit position of `a + b`, via Kogge-Stone doubling:
/// bit `i` of the result is the carry out of position `i`.
fn prefix_carries(a: u128, b: u128, win: u32) -> u128 {
    let m = mask(win);
    let mut g = a & b;
    let mut p = a ^ b;
    let mut s = 1;
    while s < win {
        g |= p & (g << s);
        p &= p << s;
        s <<= 1;
    }
    g & m
}

/// Sign bit of `wrap(a + b)` without a full addition.
fn lookahead_sign(a: u128, b: u128, win: u32) -> bool {
    let carries = prefix_carries(a, b, win);
    // Sum bit i is a_i ^ b_i ^ carry_in_i, and carry_in_i is carry_out of
    // position i - 1.
    ((a ^ b ^ (carries << 1)) >> (win - 1)) & 1 == 1
}

/// Whether `wrap(a + b) == 0`, decided position-wise: the sum is zero
/// exactly when every XOR bit equals the incoming carry, which collapses to
/// comparing `a ^ b` with `(a | b) << 1` inside the window.
fn lookahead_zero(a: u128, b: u128, win: u32) -> bool {
    let m = mask(win);
    (a ^ b) & m == ((a | b) << 1) & m
}
