//! Runs every acceptance check and prints one line per check.

use std::process::ExitCode;

use bayes_bai::validate::{self, ValidateConfig};

fn main() -> ExitCode {
    // `cargo test -- --list` and similar harness probes pass flags we ignore.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cfg = ValidateConfig {
        workers,
        ..ValidateConfig::default()
    };
    let report = validate::run_with(&cfg, |c| {
        println!(
            "{} [{:>2}] {} | measured {} | bound {} | tol {} | {:.1}s",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            c.measured,
            c.bound,
            c.tolerance,
            c.seconds
        );
        if !c.passed && !c.detail.is_empty() {
            for line in c.detail.lines() {
                println!("       {line}");
            }
        }
    });
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!("acceptance: {} passed, {failed} failed", report.criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
