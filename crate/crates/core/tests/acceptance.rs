//! Acceptance run of all seventeen criteria at their stated tolerances.
//!
//! Prints one PASS/FAIL line per criterion followed by its individual
//! checks. Criteria listed in `KNOWN_DISCREPANCIES` fail because the stated
//! target disagrees with the exact value; they are still reported as FAIL
//! but do not fail the run. Any other failure, or a known discrepancy that
//! unexpectedly passes, exits with status 1.

use std::process::ExitCode;
use std::time::Instant;

use treefv::verify::{run, Suite, VerifyConfig};

const SEED: u64 = 20_240_601;

/// Criteria whose printed target is contradicted by an exact computation.
const KNOWN_DISCREPANCIES: [(u8, &str); 3] = [
    (1, "two listed generator rows are misprinted; the derived rows follow from the merge rule"),
    (11, "the exact variance of Z_1 tends to 1/2, not 2"),
    (15, "the limiting variance slope of B_ε is 1/2, not 1"),
];

fn main() -> ExitCode {
    let start = Instant::now();
    let report = match run(Suite::All, &VerifyConfig::new(SEED)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance run aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut unexpected = Vec::new();
    for c in &report.criteria {
        let known = KNOWN_DISCREPANCIES.iter().find(|(id, _)| *id == c.id);
        let verdict = if c.pass() { "PASS" } else { "FAIL" };
        let note = match (known, c.pass()) {
            (Some((_, why)), false) => format!(" [known discrepancy: {why}]"),
            (Some(_), true) => {
                unexpected.push(c.id);
                " [expected to fail]".to_string()
            }
            (None, false) => {
                unexpected.push(c.id);
                String::new()
            }
            (None, true) => String::new(),
        };
        println!("{verdict} criterion {:>2}: {}{note}", c.id, c.title);
        for check in &c.checks {
            println!("      {}", check.line());
        }
    }
    let passed = report.criteria.iter().filter(|c| c.pass()).count();
    println!(
        "\n{passed}/{} criteria passed in {:.0} s (seed {SEED}); unexpected outcomes: {:?}",
        report.criteria.len(),
        start.elapsed().as_secs_f64(),
        unexpected
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
