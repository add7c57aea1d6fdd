//! Rate-versus-distance data for the three curves (ECS with optimized
//! intensity, Bell-state baseline, PLOB bound) as CSV.
//!
//! ```bash
//! cargo run --release --example rate_distance_sweep > rates.csv
//! cargo run --release --example rate_distance_sweep -- 0.07 > rates_ed07.csv
//! ```
//!
//! The optional argument is the misalignment error.

use ecs_diqkd::output::write_csv;
use ecs_diqkd::sweep::sweep;
use ecs_diqkd::{ProtocolParams, SweepConfig};

fn main() -> ecs_diqkd::Result<()> {
    let e_d = std::env::args().nth(1).map_or(0.0, |a| a.parse().expect("numeric e_d"));
    let config = SweepConfig::with_base(ProtocolParams {
        e_d,
        ..ProtocolParams::default()
    });
    let rows = sweep(&config)?;
    let zero = rows.iter().filter(|r| r.zero_rate).count();
    eprintln!("{} rows, {zero} without a positive ECS rate", rows.len());
    write_csv(&rows, std::io::stdout().lock())
}
