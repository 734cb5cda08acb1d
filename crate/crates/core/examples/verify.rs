//! Runs the exact identity checks on the small corpus, including the
//! comparison with the dense fundamental-matrix oracle.
//!
//! cargo run --release --example verify

use harmonic_explorer::verify::{run_verify, Corpus, VerifyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = VerifyConfig { corpus: Corpus::Tiny, oracle: true, ..VerifyConfig::default() };
    let report = run_verify(&cfg)?;
    println!("{} domains", report.domains.len());
    for c in &report.checks {
        println!("{:<42} {:>5} cases  max error {:9.2e}  {}", c.name, c.cases, c.max_error, if c.passed { "ok" } else { "FAIL" });
    }
    report.write_csv(std::io::stdout().lock())?;
    Ok(())
}
