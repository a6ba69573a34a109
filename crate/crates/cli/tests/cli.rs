//! End-to-end tests driving the compiled binary.

use posit_div::DivisionTrace;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_posit-div"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn quotient_line(stdout: &str) -> &str {
    stdout.lines().next().expect("output has a quotient line")
}

#[test]
fn worked_ten_bit_example_prints_the_expected_word() {
    let (code, out, _) = run(&[
        "div",
        "--n",
        "10",
        "--x",
        "0011010111",
        "--d",
        "0001001100",
        "--variant",
        "srt-cs-of",
        "--radix",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("q = 0110011111"), "{out}");
    assert!(out.contains("value 62"), "{out}");
}

#[test]
fn zero_dividend_yields_the_zero_word() {
    let (code, out, _) = run(&["div", "--n", "10", "--x", "0000000000", "--d", "0001001100"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("q = 0000000000"), "{out}");
}

#[test]
fn nar_operands_propagate() {
    let (code, out, _) = run(&["div", "--n", "10", "--x", "0011010111", "--d", "1000000000"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("q = 1000000000"), "{out}");
    assert!(out.contains("value NaR"), "{out}");
}

#[test]
fn scaled_radix_4_matches_radix_2_on_sample_pairs() {
    for (x, d) in [
        ("0x4d2", "0x0abc"),
        ("0x7fff", "0x0001"),
        ("0xbeef", "0x1357"),
    ] {
        let r2 = run(&[
            "div",
            "--n",
            "16",
            "--x",
            x,
            "--d",
            d,
            "--variant",
            "srt-cs",
            "--radix",
            "2",
        ]);
        let r4 = run(&[
            "div",
            "--n",
            "16",
            "--x",
            x,
            "--d",
            d,
            "--variant",
            "srt-cs",
            "--radix",
            "4",
            "--scaled",
        ]);
        assert_eq!(r2.0, 0);
        assert_eq!(r4.0, 0);
        assert_eq!(
            quotient_line(&r2.1),
            quotient_line(&r4.1),
            "{x}/{d} disagrees between radices"
        );
    }
}

#[test]
fn json_trace_round_trips_through_the_trace_parser() {
    let (code, out, _) = run(&[
        "--json",
        "div",
        "--n",
        "10",
        "--x",
        "0011010111",
        "--d",
        "0001001100",
        "--trace",
    ]);
    assert_eq!(code, 0);
    let trace = DivisionTrace::from_jsonl(&out).expect("trace parses");
    assert_eq!(trace.header.width, 10);
    assert_eq!(trace.rows.len(), 8);
    assert_eq!(trace.footer.result, "0110011111");
}

#[test]
fn json_summary_is_machine_readable() {
    let (code, out, _) = run(&[
        "--json",
        "div",
        "--n",
        "10",
        "--x",
        "0011010111",
        "--d",
        "0001001100",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).expect("json parses");
    assert_eq!(v["q"], "0110011111");
    assert_eq!(v["config"], "srt-cs-of-fr-r2");
    assert_eq!(v["cycles"], 11);
}

#[test]
fn exhaustive_eight_bit_sweep_is_clean_for_every_variant() {
    let (code, out, _) = run(&[
        "--json",
        "sweep",
        "--n",
        "8",
        "--exhaustive",
        "--all-variants",
    ]);
    assert_eq!(code, 0, "sweep must exit 0 when clean");
    let v: serde_json::Value = serde_json::from_str(out.trim()).expect("json parses");
    assert_eq!(v["pairs"], 65536);
    let configs = v["configs"].as_array().expect("configs array");
    assert_eq!(configs.len(), 11);
    for c in configs {
        assert_eq!(c["mismatches"], 0, "{} has mismatches", c["config"]);
        assert_eq!(c["checked"], 65536);
    }
}

#[test]
fn random_sweeps_are_identical_across_worker_counts() {
    let args = [
        "--json", "sweep", "--n", "16", "--random", "1500", "--seed", "7",
    ];
    let one = run(&[&args[..], &["--workers", "1"][..]].concat());
    let four = run(&[&args[..], &["--workers", "4"][..]].concat());
    assert_eq!(one.0, 0);
    assert_eq!(one.1, four.1, "report must not depend on the worker count");
}

#[test]
fn cycles_table_reports_the_latency_model() {
    let (code, out, _) = run(&["--json", "cycles"]);
    assert_eq!(code, 0);
    let rows: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).expect("row parses"))
        .collect();
    let pins = [
        (16, 14, 17, 8, 11, 12),
        (32, 30, 33, 16, 19, 20),
        (64, 62, 65, 32, 35, 36),
    ];
    assert_eq!(rows.len(), pins.len());
    for (row, (w, i2, c2, i4, c4, c4s)) in rows.iter().zip(pins) {
        assert_eq!(row["width"], w);
        assert_eq!(row["r2_iterations"], i2);
        assert_eq!(row["r2_cycles"], c2);
        assert_eq!(row["r4_iterations"], i4);
        assert_eq!(row["r4_cycles"], c4);
        assert_eq!(row["r4_scaled_cycles"], c4s);
    }
}

#[test]
fn selection_table_dump_covers_all_divisor_intervals() {
    let (code, out, _) = run(&["table"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("j=")).count(), 16);

    let (code, out, _) = run(&["--json", "table"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).expect("json parses");
    assert_eq!(v["rows"].as_array().expect("rows").len(), 16);
}

#[test]
fn config_file_presets_lose_to_explicit_flags() {
    let dir = env!("CARGO_TARGET_TMPDIR");
    let path = format!("{dir}/presets.conf");
    std::fs::write(&path, "# defaults for this test\nn = 10\nvariant = nrd\n").unwrap();

    let (code, out, _) = run(&[
        "--config",
        &path,
        "div",
        "--x",
        "0011010111",
        "--d",
        "0001001100",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("config nrd-r2"), "{out}");

    let (code, out, _) = run(&[
        "--config",
        &path,
        "div",
        "--x",
        "0011010111",
        "--d",
        "0001001100",
        "--variant",
        "srt",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("config srt-r2"), "{out}");
}

#[test]
fn config_file_errors_name_the_offending_line() {
    let dir = env!("CARGO_TARGET_TMPDIR");
    let path = format!("{dir}/broken.conf");
    std::fs::write(&path, "n = 10\ncolor = red\n").unwrap();
    let (code, _, err) = run(&["--config", &path, "cycles"]);
    assert_eq!(code, 2);
    assert!(err.contains(":2:"), "{err}");
    assert!(err.contains("color"), "{err}");
}

#[test]
fn usage_errors_exit_with_code_2() {
    let cases: &[&[&str]] = &[
        &["div", "--n", "10", "--x", "zzz", "--d", "0001001100"],
        &["div", "--n", "10", "--x", "1024", "--d", "0001001100"],
        &[
            "div",
            "--n",
            "10",
            "--x",
            "0011010111",
            "--d",
            "0001001100",
            "--variant",
            "fancy",
        ],
        &[
            "div",
            "--n",
            "10",
            "--x",
            "0011010111",
            "--d",
            "0001001100",
            "--radix",
            "3",
        ],
        &[
            "div",
            "--n",
            "10",
            "--x",
            "0011010111",
            "--d",
            "0001001100",
            "--scaled",
        ],
        &["sweep", "--n", "16", "--exhaustive"],
        &["sweep", "--n", "8"],
        &["sweep", "--n", "7", "--random", "10"],
        &["cycles", "--n", "7"],
    ];
    for args in cases {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?} should fail cleanly: {err}");
        assert!(err.contains("error"), "{args:?}: {err}");
    }
}
