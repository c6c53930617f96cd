//! Runs every acceptance check and prints one line per criterion. Built
//! without the test harness so the lines are never captured.

use std::process::ExitCode;

use cvlink::validation;

fn main() -> ExitCode {
    let reports = validation::run_all();
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if reports.len() == 12 && failed.is_empty() {
        println!("acceptance: 12/12 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
