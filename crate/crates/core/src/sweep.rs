//! Differential sweeps: run divider configurations against the exact
//! reference over exhaustive or randomized operand sets.
//!
//! Work splits into a fixed number of shards handed to a small worker pool,
//! and reports merge in shard order, so results are identical for any worker
//! count. Randomized sweeps derive one RNG per shard from the user seed and
//! inject edge operands (zero, NaR, the range extremes, all-ones fractions)
//! both as a deterministic preamble and as random substitutions.

use crate::codec::PositWord;
use crate::engine::{divide_quick, DivisionConfig, Radix, Variant};
use crate::oracle::{divide_exact, CachedOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Worker threads to use: the `POSIT_DIV_WORKERS` variable when set to a
/// positive number, otherwise the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("POSIT_DIV_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
}

/// Every supported configuration at a width, named: the three radix-2
/// recurrences, carry-save radix 4 plain and prescaled, and the carry-save
/// family again with on-the-fly conversion and with fast final flags.
pub fn all_variant_configs(width: u32) -> Vec<(String, DivisionConfig)> {
    let mk = |variant, radix, scaled, otf, fr| {
        DivisionConfig::new(width, variant, radix, scaled, otf, fr).expect("valid config")
    };
    [
        mk(Variant::NonRestoring, Radix::Two, false, false, false),
        mk(Variant::SrtNonRedundant, Radix::Two, false, false, false),
        mk(Variant::SrtCarrySave, Radix::Two, false, false, false),
        mk(Variant::SrtCarrySave, Radix::Four, false, false, false),
        mk(Variant::SrtCarrySave, Radix::Four, true, false, false),
        mk(Variant::SrtCarrySave, Radix::Two, false, true, false),
        mk(Variant::SrtCarrySave, Radix::Four, false, true, false),
        mk(Variant::SrtCarrySave, Radix::Four, true, true, false),
        mk(Variant::SrtCarrySave, Radix::Two, false, true, true),
        mk(Variant::SrtCarrySave, Radix::Four, false, true, true),
        mk(Variant::SrtCarrySave, Radix::Four, true, true, true),
    ]
    .into_iter()
    .map(|c| (c.name(), c))
    .collect()
}

/// Looks up a configuration by its canonical name.
pub fn config_by_name(name: &str, width: u32) -> Option<DivisionConfig> {
    all_variant_configs(width)
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, c)| c)
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub x: String,
    pub d: String,
    pub got: String,
    pub want: String,
}

#[derive(Debug, Serialize)]
pub struct ConfigReport {
    pub config: String,
    pub checked: u64,
    pub mismatches: u64,
    /// First few mismatching pairs, for diagnosis.
    pub samples: Vec<Mismatch>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub width: u32,
    pub kind: String,
    pub pairs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub configs: Vec<ConfigReport>,
}

impl SweepReport {
    pub fn clean(&self) -> bool {
        self.configs.iter().all(|c| c.mismatches == 0)
    }
}

const SAMPLE_CAP: usize = 8;

/// Per-shard tallies for one config.
#[derive(Default, Clone)]
struct Tally {
    checked: u64,
    mismatches: u64,
    samples: Vec<Mismatch>,
}

impl Tally {
    fn record(&mut self, x: PositWord, d: PositWord, got: &str, want: PositWord) {
        self.checked += 1;
        self.mismatches += 1;
        if self.samples.len() < SAMPLE_CAP {
            self.samples.push(Mismatch {
                x: x.to_binary_string(),
                d: d.to_binary_string(),
                got: got.to_string(),
                want: want.to_binary_string(),
            });
        }
    }
}

/// Checks one operand pair against the reference on every config.
fn check_pair(
    x: PositWord,
    d: PositWord,
    want: PositWord,
    configs: &[(String, DivisionConfig)],
    tallies: &mut [Tally],
) {
    for ((_, cfg), tally) in configs.iter().zip(tallies.iter_mut()) {
        match divide_quick(x, d, cfg) {
            Ok(got) if got == want => tally.checked += 1,
            Ok(got) => tally.record(x, d, &got.to_binary_string(), want),
            Err(e) => tally.record(x, d, &format!("<error: {e}>"), want),
        }
    }
}

/// Runs `shards` jobs on up to `workers` threads, returning results in shard
/// order regardless of scheduling.
fn run_shards<T, F>(shards: usize, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..shards).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(shards).max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= shards {
                    break;
                }
                let result = job(i);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("shard completed"))
        .collect()
}

fn merge(
    width: u32,
    kind: &str,
    seed: Option<u64>,
    configs: &[(String, DivisionConfig)],
    sharded: Vec<Vec<Tally>>,
) -> SweepReport {
    let mut merged = vec![Tally::default(); configs.len()];
    for shard in sharded {
        for (acc, t) in merged.iter_mut().zip(shard) {
            acc.checked += t.checked;
            acc.mismatches += t.mismatches;
            for s in t.samples {
                if acc.samples.len() < SAMPLE_CAP {
                    acc.samples.push(s);
                }
            }
        }
    }
    let pairs = merged.first().map_or(0, |t| t.checked);
    SweepReport {
        width,
        kind: kind.to_string(),
        pairs,
        seed,
        configs: configs
            .iter()
            .zip(merged)
            .map(|((name, _), t)| ConfigReport {
                config: name.clone(),
                checked: t.checked,
                mismatches: t.mismatches,
                samples: t.samples,
            })
            .collect(),
    }
}

/// Every operand pair at the width (specials included) against the
/// reference. Practical for small widths only.
pub fn exhaustive_sweep(
    width: u32,
    configs: &[(String, DivisionConfig)],
    workers: usize,
) -> SweepReport {
    assert!(width <= 16, "exhaustive sweeps are for small widths");
    let oracle = CachedOracle::new(width);
    let total = 1u64 << width;
    let shards = (total as usize).min(256);
    let per = total / shards as u64;
    let sharded = run_shards(shards, workers, |shard| {
        let mut tallies = vec![Tally::default(); configs.len()];
        let lo = shard as u64 * per;
        let hi = if shard == shards - 1 { total } else { lo + per };
        for xb in lo..hi {
            let x = PositWord::new(xb, width).unwrap();
            for db in 0..total {
                let d = PositWord::new(db, width).unwrap();
                check_pair(x, d, oracle.divide(x, d), configs, &mut tallies);
            }
        }
        tallies
    });
    merge(width, "exhaustive", None, configs, sharded)
}

/// Operand words that sit on format boundaries.
pub fn edge_words(width: u32) -> Vec<PositWord> {
    let n = width;
    let one = 1u64 << (n - 2);
    let mut words = vec![
        PositWord::zero(n),
        PositWord::nar(n),
        PositWord::maxpos(n),
        PositWord::minpos(n),
        PositWord::new(one, n).unwrap(),
        PositWord::new(one | 1, n).unwrap(), // 1 + one ulp
        PositWord::new(one - 1, n).unwrap(), // largest value below 1
        PositWord::new((1 << (n - 1)) - 2, n).unwrap(), // maxpos - one ulp
        PositWord::new(one | (one >> 1), n).unwrap(), // 1.1000... (exp boundary)
    ];
    let negs: Vec<PositWord> = words
        .iter()
        .filter(|w| !w.is_zero() && !w.is_nar())
        .map(|w| w.negate())
        .collect();
    words.extend(negs);
    words.dedup_by_key(|w| w.bits());
    words
}

/// Seeded random pairs (with edge injection) against the reference. The
/// stream depends only on `width`, `count`, and `seed`: shard RNGs are
/// derived from the seed, never from the worker layout.
pub fn random_sweep(
    width: u32,
    configs: &[(String, DivisionConfig)],
    count: u64,
    seed: u64,
    workers: usize,
) -> SweepReport {
    let edges = edge_words(width);
    let cached = if width <= 16 {
        Some(CachedOracle::new(width))
    } else {
        None
    };
    let reference = |x: PositWord, d: PositWord| match &cached {
        Some(c) => c.divide(x, d),
        None => divide_exact(x, d),
    };
    let shards: u64 = 64;
    let per = count / shards;
    let sharded = run_shards(shards as usize, workers, |shard| {
        let shard = shard as u64;
        let mut tallies = vec![Tally::default(); configs.len()];
        let mut rng =
            ChaCha12Rng::seed_from_u64(seed ^ (shard + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        if shard == 0 {
            // Deterministic preamble: every edge word against every other.
            for &x in &edges {
                for &d in &edges {
                    check_pair(x, d, reference(x, d), configs, &mut tallies);
                }
            }
        }
        let mine = per
            + if shard == shards - 1 {
                count % shards
            } else {
                0
            };
        let mask = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        for _ in 0..mine {
            let mut xb = rng.gen::<u64>() & mask;
            let mut db = rng.gen::<u64>() & mask;
            if rng.gen_ratio(1, 32) {
                xb = edges[rng.gen_range(0..edges.len())].bits();
            }
            if rng.gen_ratio(1, 32) {
                db = edges[rng.gen_range(0..edges.len())].bits();
            }
            let x = PositWord::new(xb, width).unwrap();
            let d = PositWord::new(db, width).unwrap();
            check_pair(x, d, reference(x, d), configs, &mut tallies);
        }
        tallies
    });
    merge(width, "random", Some(seed), configs, sharded)
}

/// Iteration and cycle counts per width for the latency model.
#[derive(Debug, Serialize)]
pub struct CyclesRow {
    pub width: u32,
    pub r2_iterations: u32,
    pub r2_cycles: u32,
    pub r4_iterations: u32,
    pub r4_cycles: u32,
    pub r4_scaled_cycles: u32,
}

pub fn cycles_table(widths: &[u32]) -> Vec<CyclesRow> {
    widths
        .iter()
        .map(|&n| {
            let c2 = DivisionConfig::new(n, Variant::SrtCarrySave, Radix::Two, false, true, true)
                .expect("valid width");
            let c4 = DivisionConfig::new(n, Variant::SrtCarrySave, Radix::Four, false, true, true)
                .expect("valid width");
            let c4s = DivisionConfig::new(n, Variant::SrtCarrySave, Radix::Four, true, true, true)
                .expect("valid width");
            CyclesRow {
                width: n,
                r2_iterations: c2.iterations(),
                r2_cycles: c2.latency_cycles(),
                r4_iterations: c4.iterations(),
                r4_cycles: c4.latency_cycles(),
                r4_scaled_cycles: c4s.latency_cycles(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_list_is_complete_and_named() {
        let configs = all_variant_configs(16);
        assert_eq!(configs.len(), 11);
        let names: Vec<&str> = configs.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            [
                "nrd-r2",
                "srt-r2",
                "srt-cs-r2",
                "srt-cs-r4",
                "srt-cs-r4-scaled",
                "srt-cs-of-r2",
                "srt-cs-of-r4",
                "srt-cs-of-r4-scaled",
                "srt-cs-of-fr-r2",
                "srt-cs-of-fr-r4",
                "srt-cs-of-fr-r4-scaled",
            ]
        );
        for (name, _) in &configs {
            assert!(config_by_name(name, 16).is_some());
        }
        assert!(config_by_name("bogus", 16).is_none());
    }

    #[test]
    fn edge_words_cover_specials_and_extremes() {
        for n in [8u32, 16, 64] {
            let words = edge_words(n);
            assert!(words.iter().any(|w| w.is_zero()));
            assert!(words.iter().any(|w| w.is_nar()));
            assert!(words.contains(&PositWord::maxpos(n)));
            assert!(words.contains(&PositWord::minpos(n).negate()));
            // All distinct.
            let mut bits: Vec<u64> = words.iter().map(|w| w.bits()).collect();
            bits.sort_unstable();
            bits.dedup();
            assert_eq!(bits.len(), words.len());
        }
    }

    #[test]
    fn random_sweeps_are_deterministic_across_worker_counts() {
        let configs = all_variant_configs(12);
        let slice = &configs[2..4];
        let a = random_sweep(12, slice, 400, 7, 1);
        let b = random_sweep(12, slice, 400, 7, 4);
        assert_eq!(a.pairs, b.pairs);
        assert!(a.clean() && b.clean());
        let c = random_sweep(12, slice, 400, 8, 2);
        assert_eq!(c.pairs, a.pairs);
    }

    #[test]
    fn cycles_table_matches_the_model() {
        let rows = cycles_table(&[16, 32, 64]);
        let flat: Vec<(u32, u32, u32, u32, u32)> = rows
            .iter()
            .map(|r| {
                (
                    r.width,
                    r.r2_iterations,
                    r.r2_cycles,
                    r.r4_iterations,
                    r.r4_cycles,
                )
            })
            .collect();
        assert_eq!(
            flat,
            [
                (16, 14, 17, 8, 11),
                (32, 30, 33, 16, 19),
                (64, 62, 65, 32, 35)
            ]
        );
        assert!(rows.iter().all(|r| r.r4_scaled_cycles == r.r4_cycles + 1));
    }
}
