//! The fourteen acceptance criteria at full size, one line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use percmap::verify::{run_criterion, Profile, CRITERIA};

const SEED: u64 = 20_240_601;

fn main() -> ExitCode {
    // Honour `cargo test -- --list` and name filters without running anything.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    println!("\nrunning {} acceptance criteria (seed {SEED})", CRITERIA.len());
    let mut failed = Vec::new();
    for id in 1..=CRITERIA.len() {
        let start = Instant::now();
        let r = run_criterion(id, Profile::Full, SEED);
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {:<30} {:>7.1}s  {}", id, r.name, start.elapsed().as_secs_f64(), r.details);
        if !r.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
