//! Run every axiom suite on the built-in corpus and print the scoreboard.

use coarsehom::harness::{verify_suite, SuiteConfig};

fn main() -> coarsehom::Result<()> {
    let report = verify_suite(&SuiteConfig::default())?;
    for item in &report.items {
        println!("{:?}\t{:?}\t{}\t{}", item.verdict, item.axiom, item.name, item.detail);
    }
    println!("failures: {}", report.failures());
    std::process::exit(if report.failures() == 0 { 0 } else { 1 });
}
