//! Acceptance suite at the reference configuration. Prints one line per
//! criterion and fails if any criterion fails.

use extremalflow::verify::{run_all, VerifySettings};

fn main() {
    let settings = VerifySettings::default();
    println!("\nacceptance: A = {}, a = {}, grid_n = {}", settings.force, settings.half_span, settings.grid_n);
    let reports = run_all(&settings);
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed\n", reports.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
