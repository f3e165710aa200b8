//! Runs every acceptance criterion and prints one line per criterion.

use std::io::Write;

use sparse_sieve::audit::{run_criterion, AuditConfig};

fn main() {
    let cfg = AuditConfig::default();
    cfg.validate().expect("default audit config is valid");
    let mut failed = 0;
    for &id in &cfg.criteria {
        let o = run_criterion(id, &cfg);
        println!("{}", o.line());
        std::io::stdout().flush().ok();
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", cfg.criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
