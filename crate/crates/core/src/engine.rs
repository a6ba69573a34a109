//! The divider engine: operand unpacking, the digit recurrence, and the
//! final correction/normalization/rounding stage, for every supported
//! variant.
//!
//! All variants share one skeleton. Significands are placed on a fixed-point
//! grid, the residual starts at `x_eff / r` so the recurrence invariant
//! holds from step one, and each iteration selects a digit, updates the
//! residual, and accumulates the digit into a quotient. After the last
//! iteration the quotient is an exact truncation of `x_eff / d_eff`, so a
//! negative residual means exactly one ulp too high. The corrected quotient
//! lands in `(1/2, 2)`: values below 1 shift up one place and decrement the
//! result scale. Rounding needs only the fraction field, the next bit, and
//! a sticky bit that also ORs in "the corrected remainder is nonzero".
//!
//! The variants differ in three orthogonal ways: how the residual is stored
//! and the digit chosen (non-restoring, non-redundant SRT, carry-save SRT
//! with radix 2 or 4, optionally with prescaled operands), whether signed
//! digits are converted on the fly or fixed by one final borrow, and whether
//! the final sign/zero flags come from a carry lookahead or an assimilated
//! residual. Outputs never differ across variants; latency and datapath
//! shape do.

use crate::codec::{decode, encode_round, DecodedPosit, PositWord};
use crate::otf::OtfState;
use crate::prescale::prescale_for;
pub use crate::qds::Radix;
use crate::qds::{
    r4_interval_of, r4_table, select_nonrestoring, select_r2_carry_save, select_r2_exact,
    select_r4_scaled,
};
use crate::residual::{Residual, ResidualFlags, ResidualForm};
use crate::scale;
use crate::trace::{fixed_decimal, DivisionTrace, TraceFooter, TraceHeader, TraceRow};
use thiserror::Error;

/// Recurrence family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Digit set `{-1, +1}` selected by the residual sign; non-redundant
    /// residual. Radix 2 only.
    NonRestoring,
    /// Digit set `{-1, 0, +1}` selected from a two-bit truncation of the
    /// shifted residual; non-redundant residual. Radix 2 only.
    SrtNonRedundant,
    /// SRT with a carry-save residual and a redundant digit set; radix 2 or
    /// 4, the latter optionally with prescaled operands.
    SrtCarrySave,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("posit width {0} outside the supported range 8..=64")]
    Width(u32),
    #[error("radix-4 iteration requires the carry-save variant")]
    RadixFourNeedsCarrySave,
    #[error("operand scaling requires radix 4")]
    ScalingNeedsRadixFour,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("operand widths x={x}, d={d} do not match the configured width {config}")]
    WidthMismatch { x: u32, d: u32, config: u32 },
    #[error("residual left its containment bound at iteration {iteration}")]
    ContainmentLost { iteration: u32 },
    #[error("corrected quotient {q_units} at {frac_bits} fraction bits fell outside (1/2, 2)")]
    QuotientRange { q_units: u128, frac_bits: u32 },
}

/// A validated divider configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivisionConfig {
    width: u32,
    variant: Variant,
    radix: Radix,
    scaled: bool,
    otf: bool,
    fast_flags: bool,
}

impl DivisionConfig {
    /// `scaled` prescales both operands (radix 4 only); `otf` converts
    /// quotient digits on the fly; `fast_flags` derives the final residual
    /// sign/zero from a carry lookahead instead of an assimilating add.
    pub fn new(
        width: u32,
        variant: Variant,
        radix: Radix,
        scaled: bool,
        otf: bool,
        fast_flags: bool,
    ) -> Result<Self, ConfigError> {
        if !(8..=64).contains(&width) {
            return Err(ConfigError::Width(width));
        }
        if radix == Radix::Four && variant != Variant::SrtCarrySave {
            return Err(ConfigError::RadixFourNeedsCarrySave);
        }
        if scaled && radix != Radix::Four {
            return Err(ConfigError::ScalingNeedsRadixFour);
        }
        Ok(DivisionConfig {
            width,
            variant,
            radix,
            scaled,
            otf,
            fast_flags,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn converts_on_the_fly(&self) -> bool {
        self.otf
    }

    pub fn uses_fast_flags(&self) -> bool {
        self.fast_flags
    }

    /// Canonical config name used in traces and reports.
    pub fn name(&self) -> String {
        let mut s = String::from(match self.variant {
            Variant::NonRestoring => "nrd",
            Variant::SrtNonRedundant => "srt",
            Variant::SrtCarrySave => "srt-cs",
        });
        if self.otf {
            s.push_str("-of");
        }
        if self.fast_flags {
            s.push_str("-fr");
        }
        s.push_str(match self.radix {
            Radix::Two => "-r2",
            Radix::Four => "-r4",
        });
        if self.scaled {
            s.push_str("-scaled");
        }
        s
    }

    /// Integer part of the digit redundancy ratio (1 for the radix-2 digit
    /// sets, 0 for radix 4 with digits up to 2).
    fn rho_floor(&self) -> u32 {
        match self.radix {
            Radix::Two => 1,
            Radix::Four => 0,
        }
    }

    /// Iterations needed to retire `width - 1 - floor(rho)` quotient bits.
    pub fn iterations(&self) -> u32 {
        let bits = self.width - 1 - self.rho_floor();
        bits.div_ceil(self.radix.log2())
    }

    /// Latency under the fixed cycle model: one cycle per iteration, plus
    /// unpack, round, and pack, plus one more cycle when prescaling.
    pub fn latency_cycles(&self) -> u32 {
        self.iterations() + 3 + self.scaled as u32
    }

    /// Recurrence datapath width metric of the modeled hardware.
    pub fn datapath_bits(&self) -> u32 {
        self.width - 2 + self.radix.log2() - self.rho_floor()
    }

    /// Fraction bits of the residual/divisor grid used here. Chosen so that
    /// operand placement, the initial shift by the radix, and every step are
    /// exact; prescaled operands need extra room for the `m16/16` products.
    pub fn residual_fraction_bits(&self) -> u32 {
        match (self.radix, self.scaled) {
            (Radix::Two, _) => self.width - 4,
            (Radix::Four, false) => self.width - 3,
            (Radix::Four, true) => self.width + 2,
        }
    }

    /// Fraction bits of the corrected quotient `x_eff / d_eff in (1/2, 2)`.
    pub fn quotient_frac_bits(&self) -> u32 {
        self.iterations() * self.radix.log2() - self.radix.log2()
    }
}

/// Result of a traced division.
#[derive(Debug, Clone)]
pub struct Division {
    pub result: PositWord,
    pub trace: DivisionTrace,
}

impl Division {
    /// Quotient digits in iteration order.
    pub fn digits(&self) -> Vec<i32> {
        self.trace.rows.iter().map(|r| r.digit).collect()
    }
}

/// Divides with a full execution trace.
pub fn divide(
    x: PositWord,
    d: PositWord,
    config: &DivisionConfig,
) -> Result<Division, EngineError> {
    let (result, trace) = run(x, d, config, true)?;
    Ok(Division {
        result,
        trace: trace.expect("trace requested"),
    })
}

/// Divides without building a trace (the sweep path).
pub fn divide_quick(
    x: PositWord,
    d: PositWord,
    config: &DivisionConfig,
) -> Result<PositWord, EngineError> {
    Ok(run(x, d, config, false)?.0)
}

/// Iterations for a width/radix pair without building a config.
pub fn iteration_count(width: u32, radix: Radix) -> u32 {
    let rho_floor = match radix {
        Radix::Two => 1,
        Radix::Four => 0,
    };
    (width - 1 - rho_floor).div_ceil(radix.log2())
}

fn header_for(x: PositWord, d: PositWord, cfg: &DivisionConfig, m16: Option<u32>) -> TraceHeader {
    TraceHeader {
        config: cfg.name(),
        width: cfg.width,
        radix: cfg.radix.value(),
        x: x.to_binary_string(),
        d: d.to_binary_string(),
        iterations: cfg.iterations(),
        cycles: cfg.latency_cycles(),
        datapath_bits: cfg.datapath_bits(),
        residual_fraction_bits: cfg.residual_fraction_bits(),
        residual_window_bits: cfg.residual_fraction_bits() + 5,
        scale_m16: m16,
    }
}

fn special_result(
    x: PositWord,
    d: PositWord,
    cfg: &DivisionConfig,
    word: PositWord,
    label: &str,
    want_trace: bool,
) -> (PositWord, Option<DivisionTrace>) {
    let trace = want_trace.then(|| DivisionTrace {
        header: header_for(x, d, cfg, None),
        rows: Vec::new(),
        footer: TraceFooter {
            special: Some(label.to_string()),
            result: word.to_binary_string(),
            ..TraceFooter::default()
        },
    });
    (word, trace)
}

fn run(
    x: PositWord,
    d: PositWord,
    cfg: &DivisionConfig,
    want_trace: bool,
) -> Result<(PositWord, Option<DivisionTrace>), EngineError> {
    let n = cfg.width;
    if x.width() != n || d.width() != n {
        return Err(EngineError::WidthMismatch {
            x: x.width(),
            d: d.width(),
            config: n,
        });
    }
    let dx = decode(x);
    let dd = decode(d);
    // NaR anywhere, or a zero divisor, poisons the result; a zero dividend
    // with a usable divisor is exactly zero. Latency is data independent, so
    // shortcuts report the same cycle count.
    let (nx, nd) = match (&dx, &dd) {
        (DecodedPosit::NaR, _) | (_, DecodedPosit::NaR) | (_, DecodedPosit::Zero) => {
            return Ok(special_result(
                x,
                d,
                cfg,
                PositWord::nar(n),
                "nar",
                want_trace,
            ));
        }
        (DecodedPosit::Zero, _) => {
            return Ok(special_result(
                x,
                d,
                cfg,
                PositWord::zero(n),
                "zero",
                want_trace,
            ));
        }
        (DecodedPosit::Normal(nx), DecodedPosit::Normal(nd)) => (nx, nd),
    };

    let sign_q = nx.sign ^ nd.sign;
    let sfb = nx.significand_frac_bits();
    let fb = cfg.residual_fraction_bits();
    let pad = fb - sfb;
    let sx = nx.significand() as i128;
    let sd = nd.significand() as i128;

    // Effective operands on the grid. Prescaling multiplies both by the same
    // constant `M = m16/16` and halves them, putting the divisor in
    // [63/64, 9/8]; the quotient is unchanged.
    let (x_int, d_int, m16) = if cfg.scaled {
        let p = prescale_for(sd, sfb);
        (
            p.apply(sx << pad) >> 1,
            p.apply(sd << pad) >> 1,
            Some(p.m16 as u32),
        )
    } else {
        (sx << pad, sd << pad, None)
    };

    // w(0) = x_eff / r keeps |w| <= bound * d from the start; the shift is
    // exact by construction of the grid.
    let p_log2 = cfg.radix.log2();
    debug_assert_eq!(x_int & ((1 << p_log2) - 1), 0);
    let w0 = x_int >> p_log2;

    let form = match cfg.variant {
        Variant::SrtCarrySave => ResidualForm::CarrySave,
        _ => ResidualForm::NonRedundant,
    };
    let mut w = Residual::new(form, fb, w0);
    let (bound_num, bound_den) = cfg.radix.bound();
    debug_assert!(w.respects_bound(bound_num, bound_den, d_int));

    let iterations = cfg.iterations();
    let interval = r4_interval_of(d_int, fb);
    let mut otf = OtfState::new(cfg.radix);
    let mut acc: i128 = 0;
    let mut rows = Vec::with_capacity(if want_trace { iterations as usize } else { 0 });

    for i in 1..=iterations {
        let (digit, y_hat) = match (cfg.variant, cfg.radix, cfg.scaled) {
            (Variant::NonRestoring, ..) => {
                let negative = w.value() < 0;
                (
                    select_nonrestoring(negative),
                    if want_trace {
                        String::from(if negative { "-" } else { "+" })
                    } else {
                        String::new()
                    },
                )
            }
            (Variant::SrtNonRedundant, ..) => {
                let est = w.estimate(1, 1);
                (select_r2_exact(est), maybe_decimal(want_trace, est, 1))
            }
            (Variant::SrtCarrySave, Radix::Two, _) => {
                let est = w.estimate(1, 1);
                (select_r2_carry_save(est), maybe_decimal(want_trace, est, 1))
            }
            (Variant::SrtCarrySave, Radix::Four, false) => {
                let est = w.estimate(2, 4);
                (
                    r4_table().select(interval, est),
                    maybe_decimal(want_trace, est, 4),
                )
            }
            (Variant::SrtCarrySave, Radix::Four, true) => {
                let est = w.estimate(2, 3);
                (select_r4_scaled(est), maybe_decimal(want_trace, est, 3))
            }
        };

        w.step(cfg.radix.log2(), digit, d_int);
        if !w.respects_bound(bound_num, bound_den, d_int) {
            return Err(EngineError::ContainmentLost { iteration: i });
        }
        if cfg.otf {
            otf.append(digit);
        } else {
            acc = acc * cfg.radix.value() as i128 + digit as i128;
            debug_assert!(acc >= 0, "running quotient went negative");
        }

        if want_trace {
            let (ws, wc) = w.components();
            let hexw = (w.window_bits() as usize).div_ceil(4);
            let qbits = (i * cfg.radix.log2()) as usize;
            rows.push(TraceRow {
                iter: i,
                y_hat,
                digit,
                ws_hex: format!("{ws:#0width$x}", width = hexw + 2),
                wc_hex: format!("{wc:#0width$x}", width = hexw + 2),
                q_bits: if cfg.otf {
                    otf.bits(false)
                } else {
                    format!("{:0qbits$b}", acc as u128)
                },
                qd_bits: if cfg.otf {
                    otf.bits(true)
                } else {
                    String::new()
                },
            });
        }
    }

    // Final flags: either the lookahead network or a plain assimilation.
    let flags = if cfg.fast_flags {
        w.flags(d_int)
    } else {
        let v = w.value();
        ResidualFlags {
            negative: v < 0,
            zero: v == 0,
            zero_after_add: v + d_int == 0,
        }
    };

    // A negative residual means the digit string overshot the truncated
    // quotient by one ulp.
    let q_corrected: u128 = if cfg.otf {
        otf.finalize(flags.negative)
    } else {
        (acc - flags.negative as i128) as u128
    };

    let fbq = cfg.quotient_frac_bits();
    if q_corrected < 1 << (fbq - 1) || q_corrected >= 1 << (fbq + 1) {
        return Err(EngineError::QuotientRange {
            q_units: q_corrected,
            frac_bits: fbq,
        });
    }
    let normalized = q_corrected < 1 << fbq;
    // Normalized significand 1.xxx, leading bit at position fbq.
    let q_units = q_corrected << normalized as u32;

    let sf_x = nx.scale_factor();
    let sf_d = nd.scale_factor();
    let (regime_pre, exponent_pre) = scale::subtract_split(sf_x, sf_d, 0);
    let (regime, exponent) = scale::subtract_split(sf_x, sf_d, normalized as u32);

    // q_units now carries the significand 1.xxx with fbq fraction bits:
    // fraction field, round bit, and low sticky bits in that order.
    debug_assert!(fbq > sfb);
    let frac = (q_units >> (fbq - sfb)) as u64 & ((1u64 << sfb) - 1);
    let round = (q_units >> (fbq - sfb - 1)) & 1 == 1;
    let sticky_low = q_units & ((1 << (fbq - sfb - 1)) - 1) != 0;
    let sticky = sticky_low || !flags.corrected_zero();

    let result = encode_round(sign_q, regime, exponent, frac, sfb, round, sticky, n);

    let trace = want_trace.then(|| DivisionTrace {
        header: header_for(x, d, cfg, m16),
        rows,
        footer: TraceFooter {
            special: None,
            remainder_negative: flags.negative,
            remainder_zero: flags.corrected_zero(),
            normalized,
            regime_pre_norm: regime_pre,
            exponent_pre_norm: exponent_pre,
            regime,
            exponent,
            significand_bits: format!("1{frac:0width$b}", width = sfb as usize),
            round_bit: round,
            sticky_bit: sticky,
            q_units: q_corrected as u64,
            q_frac_bits: fbq,
            residual_num: w.value().to_string(),
            result: result.to_binary_string(),
        },
    });
    Ok((result, trace))
}

fn maybe_decimal(want: bool, est: i64, t: u32) -> String {
    if want {
        fixed_decimal(est, t)
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::all_variant_configs;

    fn word(text: &str, n: u32) -> PositWord {
        PositWord::parse(text, n).unwrap()
    }

    fn cfg(
        variant: Variant,
        radix: Radix,
        scaled: bool,
        otf: bool,
        fr: bool,
        n: u32,
    ) -> DivisionConfig {
        DivisionConfig::new(n, variant, radix, scaled, otf, fr).unwrap()
    }

    #[test]
    fn config_validation_rejects_bad_combinations() {
        assert_eq!(
            DivisionConfig::new(7, Variant::NonRestoring, Radix::Two, false, false, false),
            Err(ConfigError::Width(7))
        );
        assert_eq!(
            DivisionConfig::new(16, Variant::NonRestoring, Radix::Four, false, false, false),
            Err(ConfigError::RadixFourNeedsCarrySave)
        );
        assert_eq!(
            DivisionConfig::new(16, Variant::SrtCarrySave, Radix::Two, true, false, false),
            Err(ConfigError::ScalingNeedsRadixFour)
        );
    }

    #[test]
    fn iteration_and_cycle_counts_match_the_latency_model() {
        // (width, radix-2 iters, radix-2 cycles, radix-4 iters, radix-4 cycles)
        for (n, it2, cy2, it4, cy4) in [
            (16u32, 14, 17, 8, 11),
            (32, 30, 33, 16, 19),
            (64, 62, 65, 32, 35),
        ] {
            let c2 = cfg(Variant::SrtCarrySave, Radix::Two, false, true, true, n);
            assert_eq!((c2.iterations(), c2.latency_cycles()), (it2, cy2));
            let c4 = cfg(Variant::SrtCarrySave, Radix::Four, false, true, true, n);
            assert_eq!((c4.iterations(), c4.latency_cycles()), (it4, cy4));
            let c4s = cfg(Variant::SrtCarrySave, Radix::Four, true, true, true, n);
            assert_eq!(c4s.latency_cycles(), cy4 + 1);
            assert_eq!(iteration_count(n, Radix::Two), it2);
            assert_eq!(iteration_count(n, Radix::Four), it4);
        }
    }

    #[test]
    fn datapath_width_metric() {
        let c2 = cfg(Variant::SrtCarrySave, Radix::Two, false, false, false, 16);
        assert_eq!(c2.datapath_bits(), 14);
        let c4 = cfg(Variant::SrtCarrySave, Radix::Four, false, false, false, 16);
        assert_eq!(c4.datapath_bits(), 16);
    }

    #[test]
    fn every_variant_reproduces_the_worked_ten_bit_examples() {
        let x = word("0011010111", 10);
        let d1 = word("0001001100", 10);
        let d2 = word("0000100110", 10);
        for (name, c) in all_variant_configs(10) {
            let r1 = divide_quick(x, d1, &c).unwrap();
            assert_eq!(r1, word("0110011111", 10), "{name} example 1");
            let r2 = divide_quick(x, d2, &c).unwrap();
            assert_eq!(r2, word("0111010000", 10), "{name} example 2");
        }
    }

    #[test]
    fn srt_digit_string_of_the_first_example_is_pinned() {
        let c = cfg(
            Variant::SrtNonRedundant,
            Radix::Two,
            false,
            false,
            false,
            10,
        );
        let div = divide(word("0011010111", 10), word("0001001100", 10), &c).unwrap();
        assert_eq!(div.digits(), vec![1, 0, 0, 0, 0, -1, 1, 0]);
        assert!(div.trace.footer.remainder_negative);
    }

    #[test]
    fn nonrestoring_digit_string_of_the_first_example_is_pinned() {
        let c = cfg(Variant::NonRestoring, Radix::Two, false, false, false, 10);
        let div = divide(word("0011010111", 10), word("0001001100", 10), &c).unwrap();
        assert_eq!(div.digits(), vec![1, -1, 1, 1, 1, 1, 1, -1]);
        assert!(!div.trace.footer.remainder_negative);
        // Same corrected quotient either way.
        assert_eq!(div.trace.footer.q_units, 125);
    }

    #[test]
    fn footer_of_the_second_example_shows_normalization_and_rounding_carry() {
        let c = cfg(Variant::SrtCarrySave, Radix::Two, false, true, true, 10);
        let div = divide(word("0011010111", 10), word("0000100110", 10), &c).unwrap();
        let f = &div.trace.footer;
        assert_eq!((f.regime_pre_norm, f.exponent_pre_norm), (2, 2));
        assert_eq!((f.regime, f.exponent), (2, 1));
        assert!(f.normalized);
        assert_eq!(f.q_units, 125);
        assert_eq!(f.q_frac_bits, 7);
        assert_eq!(f.significand_bits, "111110");
        assert!(f.round_bit);
        assert!(f.sticky_bit);
        assert!(!f.remainder_zero);
        // Rounding carried into the exponent: the word shows e = 2.
        assert_eq!(f.result, "0111010000");
    }

    #[test]
    fn special_inputs_take_the_shortcut_paths() {
        let n = 12;
        let x = word("010011000000", n);
        let c = cfg(Variant::SrtCarrySave, Radix::Four, true, true, true, n);
        assert!(divide_quick(x, PositWord::zero(n), &c).unwrap().is_nar());
        assert!(divide_quick(x, PositWord::nar(n), &c).unwrap().is_nar());
        assert!(divide_quick(PositWord::nar(n), x, &c).unwrap().is_nar());
        assert!(divide_quick(PositWord::zero(n), x, &c).unwrap().is_zero());
        let t = divide(PositWord::zero(n), PositWord::zero(n), &c).unwrap();
        assert!(t.result.is_nar());
        assert_eq!(t.trace.footer.special.as_deref(), Some("nar"));
        assert!(t.trace.rows.is_empty());
        assert_eq!(t.trace.header.cycles, c.latency_cycles());
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let c = cfg(Variant::SrtCarrySave, Radix::Two, false, false, false, 10);
        let err = divide_quick(PositWord::zero(12), PositWord::zero(10), &c).unwrap_err();
        assert_eq!(
            err,
            EngineError::WidthMismatch {
                x: 12,
                d: 10,
                config: 10
            }
        );
    }

    #[test]
    fn self_division_yields_one_and_exact_flags() {
        for n in [8u32, 10, 16] {
            let one = PositWord::new(1 << (n - 2), n).unwrap();
            for bits in [3u64, 17, (1 << (n - 2)) + 5, (1 << (n - 1)) - 1] {
                let x = PositWord::new(bits, n).unwrap();
                for (_, c) in all_variant_configs(n) {
                    let div = divide(x, x, &c).unwrap();
                    assert_eq!(div.result, one, "{}/{} at n={n}", x, x);
                    assert!(div.trace.footer.remainder_zero);
                    assert!(!div.trace.footer.sticky_bit);
                }
            }
        }
    }

    #[test]
    fn traced_and_quick_paths_agree() {
        let n: u32 = 16;
        for (_, c) in all_variant_configs(n) {
            for seed in 0u64..64 {
                let xb = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> (64 - n);
                let db = seed.wrapping_mul(0xc2b2_ae3d_27d4_eb4f) >> (64 - n);
                let x = PositWord::new(xb, n).unwrap();
                let d = PositWord::new(db, n).unwrap();
                assert_eq!(
                    divide(x, d, &c).unwrap().result,
                    divide_quick(x, d, &c).unwrap()
                );
            }
        }
    }
}
