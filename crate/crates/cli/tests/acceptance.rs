//! The acceptance criteria, one line each. Runs without the libtest harness so
//! that the lines are always printed.

use std::process::ExitCode;

use ncx::suites::{run_suite, DEFAULT_SUITE_SEED};

fn main() -> ExitCode {
    let results = run_suite("all", DEFAULT_SUITE_SEED).expect("`all` is a suite");
    for c in &results {
        println!("{}", c.line());
    }
    let passed = results.iter().filter(|c| c.passed).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
