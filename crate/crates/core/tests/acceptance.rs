//! Acceptance gate: one line per criterion, non-zero exit on any failure.
//! Runs without the libtest harness so the lines always appear in
//! `cargo test` output. An optional argument filters checks by id, name or tag.

use std::process::ExitCode;

use gradshift::verify::{run_check, VerifyOptions, CHECKS};

/// Wall-clock budget per criterion, in seconds.
fn budget(id: u32) -> Option<f64> {
    match id {
        1 => Some(5.0),
        2 | 4 => Some(10.0),
        7 => Some(60.0),
        8 => Some(300.0),
        _ => None,
    }
}

fn main() -> ExitCode {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let options = VerifyOptions::default();
    let mut failed = 0;
    let mut ran = 0;
    for info in CHECKS.iter().filter(|c| filter.as_deref().is_none_or(|f| c.matches(f))) {
        ran += 1;
        let result = run_check(info.id, &options);
        let over_budget = budget(info.id).filter(|b| result.seconds > *b);
        let passed = result.passed && over_budget.is_none();
        if !passed {
            failed += 1;
        }
        let mut detail = result.detail.clone();
        if let Some(b) = over_budget {
            detail = format!("runtime {:.1}s over {b:.0}s budget; {detail}", result.seconds);
        }
        println!(
            "criterion {:>2} {:<22} {} ({:.2}s) {}",
            info.id,
            info.name,
            if passed { "PASS" } else { "FAIL" },
            result.seconds,
            detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
