//! Runs every acceptance criterion at its stated scale and prints one line per
//! criterion (with measurements indented below it).
//!
//! Usage: `cargo test -p fbm-extremes-validation --test acceptance [-- <id>...]`

use std::process::ExitCode;

use fbm_extremes_validation::{all_criteria, ValidationConfig};

/// Criteria whose stated targets are inconsistent with exact values, so they are
/// expected to fail as stated. Criterion 7 compares Brownian grid maxima with
/// √(π/2) − β/√n, but `E max_{[0,1]} W = √(2/π)`; its diagnostics check the
/// estimates against the exact grid maxima instead, and those must pass.
const EXPECTED_FAILURES: &[u32] = &[7];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let cfg = ValidationConfig::default();
    let mut unexpected = Vec::new();
    let mut failed = Vec::new();
    for c in all_criteria() {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        let r = c.run(&cfg);
        println!("{}", r.detail());
        if !r.passed {
            failed.push(r.id);
        }
        let expected_fail = EXPECTED_FAILURES.contains(&r.id);
        if r.passed == expected_fail {
            unexpected.push(r.id);
        }
        if expected_fail && !r.diagnostics.iter().all(|d| d.passed) {
            unexpected.push(r.id);
        }
    }
    println!("failed criteria: {failed:?} (expected: {EXPECTED_FAILURES:?})");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
