//! Where the ECS protocol overtakes and falls behind the Bell-state
//! baseline and the repeaterless bound, plus the log-rate slopes that
//! explain it.
//!
//! ```bash
//! cargo run --release --example crossovers
//! ```

use ecs_diqkd::sweep::{find_crossovers, log10_rate_slope, protocol_rate};
use ecs_diqkd::{Protocol, ProtocolParams};

fn main() -> ecs_diqkd::Result<()> {
    let params = ProtocolParams::default();
    for other in [Protocol::Bell, Protocol::Plob] {
        let xs = find_crossovers((Protocol::Ecs, other), &params, (0.0, 600.0), 5.0)?;
        println!("ecs vs {}: crossings at {xs:.2?} km", other.name());
    }
    let ratio = protocol_rate(Protocol::Ecs, 400.0, &params)? / protocol_rate(Protocol::Bell, 400.0, &params)?;
    println!("R_ECS / R_Bell at 400 km = {ratio:.1} (10^{:.2})", ratio.log10());
    for p in [Protocol::Ecs, Protocol::Bell] {
        let slope = log10_rate_slope(p, &params, 200.0, 350.0, 5.0)?;
        println!("d log10 R / dL for {} over 200-350 km: {slope:.5} per km", p.name());
    }
    Ok(())
}
