//! Quotient digit selection.
//!
//! Every divider variant picks the next quotient digit from a short window
//! of the shifted residual instead of a full comparison. The radix-2 rules
//! are small threshold functions; the radix-4 rules are either a divisor
//! indexed lookup table (unscaled operands) or a single set of comparison
//! constants (operands scaled near 1). The table is constructed here from
//! first principles with exact rational arithmetic: a digit is admissible
//! for a (divisor interval, estimate cell) pair exactly when the containment
//! bound `|r*w - q*d| <= (2/3) d` holds over the whole region the pair can
//! describe, and admissibility of a linear constraint over a convex region
//! only needs checking at the region's vertices.

use num::{BigInt, BigRational, Signed};
use std::fmt::Write as _;
use std::sync::OnceLock;

/// Iteration radix of a divider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Radix {
    Two,
    Four,
}

impl Radix {
    pub fn value(self) -> u32 {
        match self {
            Radix::Two => 2,
            Radix::Four => 4,
        }
    }

    /// Bits retired per iteration.
    pub fn log2(self) -> u32 {
        match self {
            Radix::Two => 1,
            Radix::Four => 2,
        }
    }

    /// Largest digit magnitude of the (redundant) digit set.
    pub fn max_digit(self) -> i32 {
        match self {
            Radix::Two => 1,
            Radix::Four => 2,
        }
    }

    /// Containment bound `|w| <= (num/den) * d` maintained by the
    /// recurrences.
    pub fn bound(self) -> (i128, i128) {
        match self {
            Radix::Two => (1, 1),
            Radix::Four => (2, 3),
        }
    }
}

/// Non-restoring selection: the digit set is `{-1, +1}` and the sign of the
/// residual decides (zero counts as positive).
pub fn select_nonrestoring(residual_negative: bool) -> i32 {
    if residual_negative {
        -1
    } else {
        1
    }
}

/// Radix-2 selection from the exact one-fraction-bit truncation of the
/// shifted residual (`est` in halves). Used with a non-redundant residual,
/// where the truncation carries no carry-save error.
pub fn select_r2_exact(est_halves: i64) -> i32 {
    debug_assert!(
        (-8..=7).contains(&est_halves),
        "estimate {est_halves} out of window"
    );
    if est_halves >= 1 {
        1
    } else if est_halves >= -1 {
        0
    } else {
        -1
    }
}

/// Radix-2 selection from a carry-save estimate (`est` in halves, up to one
/// half below the true truncation). The rule shifts by that worst-case error
/// relative to [`select_r2_exact`].
pub fn select_r2_carry_save(est_halves: i64) -> i32 {
    debug_assert!(
        (-9..=7).contains(&est_halves),
        "estimate {est_halves} out of window"
    );
    if est_halves >= 0 {
        1
    } else if est_halves == -1 {
        0
    } else {
        -1
    }
}

/// Radix-4 selection for prescaled operands (`d` within `[63/64, 9/8]`),
/// from a carry-save estimate in eighths. One divisor independent constant
/// set covers the whole scaled range.
pub fn select_r4_scaled(est_eighths: i64) -> i32 {
    debug_assert!(
        (-26..=24).contains(&est_eighths),
        "estimate {est_eighths} out of window"
    );
    match est_eighths {
        12.. => 2,
        4..=11 => 1,
        -4..=3 => 0,
        -13..=-5 => -1,
        _ => -2,
    }
}

/// Divisor interval index for the radix-4 table: the top four fraction bits
/// of the significand `d in [1, 2)` held as `d_int / 2^fb`.
pub fn r4_interval_of(d_int: i128, fb: u32) -> usize {
    debug_assert!(fb >= 4);
    ((d_int >> (fb - 4)) & 15) as usize
}

/// Radix-4 digit selection table for unscaled divisors, indexed by divisor
/// interval and residual estimate cell (sixteenths).
pub struct R4Table {
    rows: Vec<R4Row>,
}

struct R4Row {
    /// First and last populated estimate cell, in sixteenths.
    lo: i64,
    hi: i64,
    /// Digit per cell; `None` marks a cell the recurrence cannot reach.
    digits: Vec<Option<i8>>,
}

/// Global estimate cell range across all divisor intervals: the shifted
/// residual obeys `|4w| <= (8/3) d < 16/3`, and the carry-save estimate sits
/// at most two sixteenths below it.
pub const R4_CELL_MIN: i64 = -87;
pub const R4_CELL_MAX: i64 = 85;

impl R4Table {
    pub fn select(&self, interval: usize, est_sixteenths: i64) -> i32 {
        let row = &self.rows[interval];
        assert!(
            (row.lo..=row.hi).contains(&est_sixteenths),
            "estimate {est_sixteenths}/16 outside interval {interval} window [{}, {}]",
            row.lo,
            row.hi
        );
        match row.digits[(est_sixteenths - row.lo) as usize] {
            Some(k) => k as i32,
            None => panic!(
                "estimate {est_sixteenths}/16 hit an unreachable cell of interval {interval}"
            ),
        }
    }

    /// Plain-text rendering used to freeze the table as a reviewable
    /// artifact: one row per divisor interval over the global cell range.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# radix-4 quotient digit selection, unscaled divisor\n");
        out.push_str("# row j: divisor significand in [1 + j/16, 1 + (j+1)/16]\n");
        out.push_str(&format!(
            "# column c (left to right {} ..= {}): shifted-residual estimate c/16\n",
            R4_CELL_MIN, R4_CELL_MAX
        ));
        out.push_str("# cell: digit 2, 1, 0; a = -1, b = -2, . = unreachable\n");
        for (j, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "j={j:2} ");
            for c in R4_CELL_MIN..=R4_CELL_MAX {
                let ch = if (row.lo..=row.hi).contains(&c) {
                    match row.digits[(c - row.lo) as usize] {
                        Some(2) => '2',
                        Some(1) => '1',
                        Some(0) => '0',
                        Some(-1) => 'a',
                        Some(-2) => 'b',
                        _ => unreachable!(),
                    }
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

/// The table for the running process, built once.
pub fn r4_table() -> &'static R4Table {
    static TABLE: OnceLock<R4Table> = OnceLock::new();
    TABLE.get_or_init(build_r4_table)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the selection table with exact arithmetic and validates it on the
/// way: unique minimal-magnitude digit per cell, monotone digits along each
/// row, and agreement between per-cell assignment and the threshold form a
/// hardware PLA would implement.
pub fn build_r4_table() -> R4Table {
    let reach = rat(8, 3); // |4w| <= (8/3) d
    let err = rat(2, 16); // carry-save estimate error window
    let mut rows = Vec::with_capacity(16);
    for j in 0..16i64 {
        let dlo = rat(16 + j, 16);
        let dhi = rat(16 + j + 1, 16);
        // Cells whose window [c/16, (c+2)/16) can intersect the reachable
        // band |y| <= (8/3) d over this divisor interval.
        let ymax = &reach * &dhi;
        let mut lo = None;
        let mut hi = None;
        let mut digits = Vec::new();
        for c in R4_CELL_MIN..=R4_CELL_MAX {
            let wlo = rat(c, 16);
            let whi = &wlo + &err;
            let verts = region_vertices(&dlo, &dhi, &wlo, &whi, &reach);
            if verts.is_empty() {
                continue;
            }
            // Reachable cells must form one contiguous run.
            if let Some(h) = hi {
                assert_eq!(
                    h,
                    c - 1,
                    "reachable cells of interval {j} are not contiguous"
                );
            }
            debug_assert!(wlo <= ymax);
            let feasible: Vec<i8> = (-2..=2i8)
                .filter(|&k| {
                    verts.iter().all(|(d, y)| {
                        let klo = rat(k as i64 * 3 - 2, 3); // k - 2/3
                        let khi = rat(k as i64 * 3 + 2, 3); // k + 2/3
                        &klo * d <= *y && *y <= &khi * d
                    })
                })
                .collect();
            assert!(
                !feasible.is_empty(),
                "no digit covers interval {j}, cell {c}/16"
            );
            // Feasible digits form a contiguous run, so the minimal
            // magnitude choice is unique.
            assert!(
                feasible.windows(2).all(|p| p[1] == p[0] + 1),
                "feasible digits not contiguous at interval {j}, cell {c}"
            );
            let pick = *feasible.iter().min_by_key(|k| k.unsigned_abs()).unwrap();
            if lo.is_none() {
                lo = Some(c);
            }
            hi = Some(c);
            digits.push(Some(pick));
        }
        let (lo, hi) = (
            lo.expect("empty interval row"),
            hi.expect("empty interval row"),
        );
        // Digits must be monotone along the estimate axis for a threshold
        // (comparison constant) implementation to exist.
        let picked: Vec<i8> = digits.iter().map(|d| d.unwrap()).collect();
        assert!(
            picked.windows(2).all(|p| p[0] <= p[1]),
            "digits of interval {j} are not monotone"
        );
        // Threshold form: m_k = first cell selecting at least k. Rebuild the
        // row from thresholds and require an exact match.
        let thresholds: Vec<i64> = (-1..=2i8)
            .map(|k| {
                (lo..=hi)
                    .find(|&c| picked[(c - lo) as usize] >= k)
                    .unwrap_or(hi + 1)
            })
            .collect();
        for c in lo..=hi {
            let by_threshold = (-1..=2i8)
                .zip(&thresholds)
                .filter(|&(_, &m)| c >= m)
                .map(|(k, _)| k)
                .next_back()
                .unwrap_or(-2);
            assert_eq!(
                by_threshold,
                picked[(c - lo) as usize],
                "threshold form disagrees at interval {j}, cell {c}"
            );
        }
        rows.push(R4Row { lo, hi, digits });
    }
    R4Table { rows }
}

/// Vertices of the region `{(d, y) : dlo <= d <= dhi, wlo <= y <= whi,
/// |y| <= reach * d}`. The region is an intersection of half planes, hence
/// convex; a linear inequality holds on it iff it holds at every vertex.
fn region_vertices(
    dlo: &BigRational,
    dhi: &BigRational,
    wlo: &BigRational,
    whi: &BigRational,
    reach: &BigRational,
) -> Vec<(BigRational, BigRational)> {
    let mut cands: Vec<(BigRational, BigRational)> = Vec::new();
    for d in [dlo, dhi] {
        for y in [wlo, whi] {
            cands.push((d.clone(), y.clone()));
        }
        cands.push((d.clone(), reach * d));
        cands.push((d.clone(), -(reach * d)));
    }
    for y in [wlo, whi] {
        // y = reach * d  =>  d = y / reach, valid only for y >= 0;
        // y = -reach * d =>  d = -y / reach, valid only for y <= 0.
        if !y.is_negative() {
            cands.push((y / reach, y.clone()));
        }
        if !y.is_positive() {
            cands.push((-(y / reach), y.clone()));
        }
    }
    cands
        .into_iter()
        .filter(|(d, y)| d >= dlo && d <= dhi && y >= wlo && y <= whi && y.abs() <= reach * d)
        .collect()
}
