//! Cross-checks the closed-form statistics against the truncated Fock-space
//! oracle on the 180-point default grid and prints the verdict on the
//! misaligned `e_zz` numerator.
//!
//! ```bash
//! cargo run --release --example oracle_check
//! ```

use ecs_diqkd::oracle::OracleConfig;
use ecs_diqkd::verify::{default_grid, verify};

fn main() {
    let start = std::time::Instant::now();
    let report = verify(&default_grid(), &OracleConfig::default(), 0.8);
    print!("{}", report.render());
    println!("elapsed: {:.2?}", start.elapsed());
    if !report.passed() {
        std::process::exit(3);
    }
}
