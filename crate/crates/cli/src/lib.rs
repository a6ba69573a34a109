//! Command line front end: single divisions (optionally traced), oracle
//! checked sweeps, cycle tables, and the radix-4 selection table dump.
//!
//! Settings resolve with command line flags first, then a plain `key=value`
//! config file, then built-in defaults. Exit status is 0 on success, 1 when
//! a sweep found mismatches, 2 on usage or input errors.

use clap::{Args, Parser, Subcommand};
use num::ToPrimitive;
use posit_div::oracle::value_of;
use posit_div::qds::{r4_table, R4_CELL_MAX, R4_CELL_MIN};
use posit_div::sweep::{
    all_variant_configs, cycles_table, exhaustive_sweep, random_sweep, worker_count, SweepReport,
};
use posit_div::{divide, DivisionConfig, PositWord, Radix, Variant};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "posit-div",
    version,
    about = "Digit-recurrence posit division: bit-accurate variants, traces, and oracle sweeps"
)]
pub struct Cli {
    /// Plain key=value file presetting n, variant, radix, scaled, seed, workers.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Machine-readable JSON output instead of aligned text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Divide two posit bit patterns with a chosen divider variant.
    Div(DivArgs),
    /// Check divider variants against the exact reference over many pairs.
    Sweep(SweepArgs),
    /// Print iterations and latency cycles per width.
    Cycles(CyclesArgs),
    /// Dump the radix-4 quotient digit selection table.
    Table,
}

#[derive(Args)]
struct DivArgs {
    /// Posit width in bits (8..=64).
    #[arg(long)]
    n: Option<u32>,
    /// Dividend: binary of exactly n digits, 0b..., 0x..., or decimal units.
    #[arg(long)]
    x: String,
    /// Divisor, same forms as --x.
    #[arg(long)]
    d: String,
    /// Recurrence family: nrd, srt, srt-cs, srt-cs-of, srt-cs-of-fr
    /// (-of converts digits on the fly, -fr uses lookahead final flags).
    #[arg(long)]
    variant: Option<String>,
    /// Iteration radix, 2 or 4.
    #[arg(long)]
    radix: Option<u32>,
    /// Prescale both operands (radix 4 only). `--scaled false` to force off.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    scaled: Option<bool>,
    /// Emit the JSON-lines execution trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Posit width in bits.
    #[arg(long)]
    n: Option<u32>,
    /// Check every operand pair (2^2n cases, allowed for n <= 12).
    #[arg(long, conflicts_with = "random")]
    exhaustive: bool,
    /// Check COUNT seeded random pairs with edge-case injection.
    #[arg(long, value_name = "COUNT")]
    random: Option<u64>,
    /// Sweep every supported variant (the default when no variant is given).
    #[arg(long)]
    all_variants: bool,
    /// Sweep a single recurrence family instead.
    #[arg(long, conflicts_with = "all_variants")]
    variant: Option<String>,
    /// Iteration radix for --variant.
    #[arg(long)]
    radix: Option<u32>,
    /// Prescaled operands for --variant.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    scaled: Option<bool>,
    /// RNG seed for --random.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides POSIT_DIV_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CyclesArgs {
    /// Width to report; repeatable. Defaults to 16, 32, 64.
    #[arg(long = "n")]
    widths: Vec<u32>,
}

/// Values a config file may preset.
#[derive(Default)]
struct Presets {
    n: Option<u32>,
    variant: Option<String>,
    radix: Option<u32>,
    scaled: Option<bool>,
    seed: Option<u64>,
    workers: Option<usize>,
}

fn parse_presets(path: &Path) -> Result<Presets, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut p = Presets::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |e: &str| format!("{}:{}: {e}", path.display(), idx + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at("expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: std::fmt::Arguments| at(&format!("{key}: {e}"));
        match key {
            "n" | "width" => p.n = Some(value.parse().map_err(|e| bad(format_args!("{e}")))?),
            "variant" => p.variant = Some(value.to_string()),
            "radix" => p.radix = Some(value.parse().map_err(|e| bad(format_args!("{e}")))?),
            "scaled" => p.scaled = Some(value.parse().map_err(|e| bad(format_args!("{e}")))?),
            "seed" => p.seed = Some(value.parse().map_err(|e| bad(format_args!("{e}")))?),
            "workers" => p.workers = Some(value.parse().map_err(|e| bad(format_args!("{e}")))?),
            other => return Err(at(&format!("unknown key {other:?}"))),
        }
    }
    Ok(p)
}

/// A recurrence family name, with optional canonical-name suffixes
/// (-r2/-r4/-scaled) folded into radix and scaling.
struct FamilySpec {
    variant: Variant,
    otf: bool,
    fast_flags: bool,
    radix: Option<Radix>,
    scaled: Option<bool>,
}

fn parse_family(name: &str) -> Result<FamilySpec, String> {
    let mut rest = name;
    let mut eat = |prefix: &str| -> bool {
        if let Some(r) = rest.strip_prefix(prefix) {
            rest = r;
            true
        } else {
            false
        }
    };
    let variant = if eat("srt-cs") {
        Variant::SrtCarrySave
    } else if eat("srt") {
        Variant::SrtNonRedundant
    } else if eat("nrd") {
        Variant::NonRestoring
    } else {
        return Err(format!(
            "unknown variant {name:?}: expected nrd, srt, or srt-cs, optionally with -of and -fr"
        ));
    };
    let otf = eat("-of");
    let fast_flags = eat("-fr");
    let radix = if eat("-r2") {
        Some(Radix::Two)
    } else if eat("-r4") {
        Some(Radix::Four)
    } else {
        None
    };
    let scaled = eat("-scaled").then_some(true);
    if !rest.is_empty() {
        return Err(format!("unknown variant {name:?}: trailing {rest:?}"));
    }
    Ok(FamilySpec {
        variant,
        otf,
        fast_flags,
        radix,
        scaled,
    })
}

fn radix_of(value: u32) -> Result<Radix, String> {
    match value {
        2 => Ok(Radix::Two),
        4 => Ok(Radix::Four),
        other => Err(format!("radix {other} not supported (2 or 4)")),
    }
}

/// Resolves one divider configuration from flags and presets. Flags win over
/// the file; the default is the full-featured radix-2 carry-save divider.
fn resolve_config(
    n: Option<u32>,
    variant: Option<&str>,
    radix: Option<u32>,
    scaled: Option<bool>,
    presets: &Presets,
) -> Result<DivisionConfig, String> {
    let width = n.or(presets.n).unwrap_or(16);
    let family = variant
        .map(str::to_owned)
        .or_else(|| presets.variant.clone())
        .unwrap_or_else(|| "srt-cs-of-fr".to_string());
    let fam = parse_family(&family)?;
    let radix_flag = match radix.or(presets.radix) {
        Some(v) => Some(radix_of(v)?),
        None => None,
    };
    let radix = match (radix_flag, fam.radix) {
        (Some(a), Some(b)) if a != b => {
            return Err(format!("--radix contradicts the radix in {family:?}"))
        }
        (a, b) => a.or(b).unwrap_or(Radix::Two),
    };
    let scaled = scaled.or(fam.scaled).or(presets.scaled).unwrap_or(false);
    DivisionConfig::new(width, fam.variant, radix, scaled, fam.otf, fam.fast_flags)
        .map_err(|e| e.to_string())
}

fn cmd_div(args: &DivArgs, presets: &Presets, json: bool) -> Result<i32, String> {
    let cfg = resolve_config(
        args.n,
        args.variant.as_deref(),
        args.radix,
        args.scaled,
        presets,
    )?;
    let n = cfg.width();
    let x = PositWord::parse(&args.x, n).map_err(|e| e.to_string())?;
    let d = PositWord::parse(&args.d, n).map_err(|e| e.to_string())?;
    let division = divide(x, d, &cfg).map_err(|e| e.to_string())?;
    let q = division.result;
    let value = match value_of(q) {
        Some(v) if v.is_integer() => format!("{v}"),
        Some(v) => format!("{v} = {}", v.to_f64().unwrap_or(f64::NAN)),
        None => "NaR".to_string(),
    };
    if json {
        if args.trace {
            print!("{}", division.trace.to_jsonl());
        } else {
            let line = serde_json::json!({
                "config": cfg.name(),
                "x": x.to_binary_string(),
                "d": d.to_binary_string(),
                "q": q.to_binary_string(),
                "q_hex": q.to_hex_string(),
                "value": value,
                "cycles": cfg.latency_cycles(),
            });
            println!("{line}");
        }
    } else {
        println!("q = {}  (hex {})  value {}", q, q.to_hex_string(), value);
        println!(
            "config {}: {} iterations, {} cycles",
            cfg.name(),
            cfg.iterations(),
            cfg.latency_cycles()
        );
        if args.trace {
            print!("{}", division.trace.to_jsonl());
        }
    }
    Ok(0)
}

fn render_report(report: &SweepReport) -> String {
    let mut out = String::new();
    let seed = report
        .seed
        .map(|s| format!(" seed={s}"))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "sweep n={} {}{}: {} pairs",
        report.width, report.kind, seed, report.pairs
    );
    let name_w = report
        .configs
        .iter()
        .map(|c| c.config.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let _ = writeln!(
        out,
        "{:<name_w$}  {:>12}  {:>10}",
        "config", "checked", "mismatches"
    );
    for c in &report.configs {
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>12}  {:>10}",
            c.config, c.checked, c.mismatches
        );
        for m in &c.samples {
            let _ = writeln!(out, "  x={} d={} got={} want={}", m.x, m.d, m.got, m.want);
        }
    }
    let total: u64 = report.configs.iter().map(|c| c.mismatches).sum();
    let _ = writeln!(
        out,
        "result: {} ({} mismatches)",
        if total == 0 { "PASS" } else { "FAIL" },
        total
    );
    out
}

fn cmd_sweep(args: &SweepArgs, presets: &Presets, json: bool) -> Result<i32, String> {
    let n = args.n.or(presets.n).unwrap_or(16);
    // Reject bad widths before the config list builder would panic on them.
    DivisionConfig::new(n, Variant::SrtCarrySave, Radix::Two, false, false, false)
        .map_err(|e| e.to_string())?;
    let configs = if args.variant.is_none() || args.all_variants {
        all_variant_configs(n)
    } else {
        let cfg = resolve_config(
            Some(n),
            args.variant.as_deref(),
            args.radix,
            args.scaled,
            presets,
        )?;
        vec![(cfg.name(), cfg)]
    };
    let workers = args
        .workers
        .or(presets.workers)
        .unwrap_or_else(worker_count);
    let report = if args.exhaustive {
        if n > 12 {
            return Err(format!(
                "exhaustive sweeps cover 2^{} pairs; use n <= 12",
                2 * n
            ));
        }
        exhaustive_sweep(n, &configs, workers)
    } else if let Some(count) = args.random {
        let seed = args.seed.or(presets.seed).unwrap_or(1);
        random_sweep(n, &configs, count, seed, workers)
    } else {
        return Err("choose a mode: --exhaustive or --random COUNT".to_string());
    };
    if json {
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else {
        print!("{}", render_report(&report));
    }
    Ok(if report.clean() { 0 } else { 1 })
}

fn cmd_cycles(args: &CyclesArgs, json: bool) -> Result<i32, String> {
    let widths = if args.widths.is_empty() {
        vec![16, 32, 64]
    } else {
        args.widths.clone()
    };
    for &n in &widths {
        // Surface invalid widths as one clean error instead of a panic.
        DivisionConfig::new(n, Variant::SrtCarrySave, Radix::Two, false, false, false)
            .map_err(|e| e.to_string())?;
    }
    let rows = cycles_table(&widths);
    if json {
        for row in &rows {
            println!("{}", serde_json::to_string(row).expect("row serializes"));
        }
    } else {
        println!(
            "{:>5}  {:>8} {:>6}  {:>8} {:>6}  {:>13}",
            "width", "r2 iters", "cycles", "r4 iters", "cycles", "scaled cycles"
        );
        for r in &rows {
            println!(
                "{:>5}  {:>8} {:>6}  {:>8} {:>6}  {:>13}",
                r.width,
                r.r2_iterations,
                r.r2_cycles,
                r.r4_iterations,
                r.r4_cycles,
                r.r4_scaled_cycles
            );
        }
    }
    Ok(0)
}

fn cmd_table(json: bool) -> i32 {
    if json {
        let text = r4_table().to_text();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        let line = serde_json::json!({
            "cell_min": R4_CELL_MIN,
            "cell_max": R4_CELL_MAX,
            "cell_unit": "sixteenths of the shifted residual estimate",
            "digits": "2 1 0, a = -1, b = -2, . = unreachable",
            "rows": rows,
        });
        println!("{line}");
    } else {
        print!("{}", r4_table().to_text());
    }
    0
}

/// Runs the parsed command line; returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    let presets = match &cli.config {
        Some(path) => match parse_presets(path) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        },
        None => Presets::default(),
    };
    let outcome = match &cli.cmd {
        Cmd::Div(args) => cmd_div(args, &presets, cli.json),
        Cmd::Sweep(args) => cmd_sweep(args, &presets, cli.json),
        Cmd::Cycles(args) => cmd_cycles(args, cli.json),
        Cmd::Table => Ok(cmd_table(cli.json)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
