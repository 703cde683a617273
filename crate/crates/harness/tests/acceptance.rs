//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! Exits nonzero if any criterion fails.

use multiproj::suite::{Suite, SuiteOptions, CRITERIA};

fn main() {
    let suite = Suite::new(SuiteOptions::default());
    let mut failed = Vec::new();
    for id in CRITERIA {
        let outcome = suite.run(id).expect("listed criteria are known");
        println!("{outcome}");
        if !outcome.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {failed:?}",
            failed.len(),
            CRITERIA.len()
        );
        std::process::exit(1);
    }
}
