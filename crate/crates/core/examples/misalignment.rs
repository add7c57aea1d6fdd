//! How misalignment error eats into the ECS advantage: the distance window
//! where ECS beats the repeaterless bound, for several error levels.
//!
//! ```bash
//! cargo run --release --example misalignment
//! ```

use ecs_diqkd::sweep::{find_crossovers, protocol_rate};
use ecs_diqkd::{Protocol, ProtocolParams};

fn main() -> ecs_diqkd::Result<()> {
    println!(
        "{:>6} {:>12} {:>12} {:>24}",
        "e_d", "R(200 km)", "R(300 km)", "beats PLOB on (km)"
    );
    for e_d in [0.0, 0.01, 0.03, 0.05, 0.07, 0.09] {
        let params = ProtocolParams {
            e_d,
            ..ProtocolParams::default()
        };
        let crossings = find_crossovers((Protocol::Ecs, Protocol::Plob), &params, (0.0, 600.0), 5.0)?;
        let window = match crossings.as_slice() {
            [a, b] => format!("[{a:.1}, {b:.1}]"),
            [] => "never".to_string(),
            other => format!("{other:.1?}"),
        };
        println!(
            "{e_d:>6} {:>12.4e} {:>12.4e} {window:>24}",
            protocol_rate(Protocol::Ecs, 200.0, &params)?,
            protocol_rate(Protocol::Ecs, 300.0, &params)?
        );
    }
    Ok(())
}
