//! Per-iteration execution traces.
//!
//! A trace is one header, one row per iteration, and one footer, and it
//! serializes to JSON lines (one object per line, each tagged with its
//! `kind`). Rows show the machine state after the iteration completed: the
//! estimate the selector saw, the digit it chose, the updated residual pair,
//! and the quotient conversion registers. The footer captures everything the
//! rounding stage consumed, with scale fields taken before rounding so a
//! rounding carry into the exponent stays visible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    /// Config name, e.g. `srt-cs-of-r4-scaled`.
    pub config: String,
    pub width: u32,
    pub radix: u32,
    /// Input words, binary.
    pub x: String,
    pub d: String,
    pub iterations: u32,
    /// Total latency in cycles under the fixed model: iterations plus one
    /// cycle each for unpack, rounding and pack, plus one more when the
    /// operands are prescaled.
    pub cycles: u32,
    /// Recurrence datapath width metric of the modeled hardware.
    pub datapath_bits: u32,
    /// Fixed-point grid actually used here: fraction bits and total window
    /// bits of the residual registers.
    pub residual_fraction_bits: u32,
    pub residual_window_bits: u32,
    /// Scaling constant as `m16/16`, present only for prescaled runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale_m16: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: u32,
    /// Estimate consumed by digit selection, as an exact decimal string
    /// (sign-only selection shows `+` or `-`).
    pub y_hat: String,
    pub digit: i32,
    /// Residual registers after the step, as window-width hex words.
    pub ws_hex: String,
    pub wc_hex: String,
    /// Quotient conversion registers after the digit, as binary strings of
    /// the bits retired so far. Variants converting at the end leave `QD`
    /// empty: that register only exists with on-the-fly conversion.
    #[serde(rename = "Q_bits")]
    pub q_bits: String,
    #[serde(rename = "QD_bits")]
    pub qd_bits: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TraceFooter {
    /// Shortcut taken instead of iterating: `nar` or `zero`. All numeric
    /// fields are zero in that case.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub special: Option<String>,
    pub remainder_negative: bool,
    /// The digit-corrected remainder is exactly zero (quotient exact).
    pub remainder_zero: bool,
    /// Quotient fell below 1 and was shifted up one place.
    pub normalized: bool,
    /// Result scale split `4k + e` before normalization...
    pub regime_pre_norm: i32,
    pub exponent_pre_norm: u8,
    /// ...and after normalization, still before rounding.
    pub regime: i32,
    pub exponent: u8,
    /// Normalized significand bits handed to rounding: leading 1, then the
    /// fraction field.
    pub significand_bits: String,
    pub round_bit: bool,
    pub sticky_bit: bool,
    /// Corrected quotient as an integer in units of 2^-q_frac_bits.
    pub q_units: u64,
    pub q_frac_bits: u32,
    /// Final residual on the grid: residual_num / 2^(header fraction bits),
    /// as a decimal string (the value can exceed 64 bits).
    pub residual_num: String,
    /// Result word, binary.
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionTrace {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
    pub footer: TraceFooter,
}

/// One line of the JSON-lines form.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header(TraceHeader),
    Row(TraceRow),
    Footer(TraceFooter),
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {0}: {1}")]
    Json(usize, serde_json::Error),
    #[error("trace must be header, rows, footer, in that order")]
    Shape,
}

impl DivisionTrace {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("trace serializes"));
            out.push('\n');
        };
        push(&Line::Header(self.header.clone()));
        for row in &self.rows {
            push(&Line::Row(row.clone()));
        }
        push(&Line::Footer(self.footer.clone()));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<DivisionTrace, TraceError> {
        let mut header = None;
        let mut rows = Vec::new();
        let mut footer = None;
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: Line = serde_json::from_str(raw).map_err(|e| TraceError::Json(i + 1, e))?;
            match line {
                Line::Header(h) if header.is_none() && rows.is_empty() && footer.is_none() => {
                    header = Some(h);
                }
                Line::Row(r) if header.is_some() && footer.is_none() => rows.push(r),
                Line::Footer(f) if header.is_some() && footer.is_none() => footer = Some(f),
                _ => return Err(TraceError::Shape),
            }
        }
        match (header, footer) {
            (Some(header), Some(footer)) => Ok(DivisionTrace {
                header,
                rows,
                footer,
            }),
            _ => Err(TraceError::Shape),
        }
    }
}

/// Exact decimal rendering of `num / 2^frac_bits` (power-of-two denominators
/// terminate in decimal). Used for the short selection estimates.
pub fn fixed_decimal(num: i64, frac_bits: u32) -> String {
    // frac * 5^frac_bits < 10^frac_bits must fit in u128.
    assert!(frac_bits <= 37);
    let neg = num < 0;
    let mag = num.unsigned_abs() as u128;
    let int = mag >> frac_bits;
    let frac = mag & ((1u128 << frac_bits) - 1);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if frac != 0 {
        // frac / 2^t = frac * 5^t / 10^t: print t digits, drop trailing zeros.
        let digits = format!(
            "{:0width$}",
            frac * 5u128.pow(frac_bits),
            width = frac_bits as usize
        );
        s.push('.');
        s.push_str(digits.trim_end_matches('0'));
    }
    s
}
