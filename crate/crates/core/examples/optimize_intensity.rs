//! Optimal intensity versus distance, certified against a dense audit grid.
//!
//! ```bash
//! cargo run --release --example optimize_intensity
//! ```

use ecs_diqkd::optimize::{audit_mu, optimize_mu, AUDIT_POINTS};
use ecs_diqkd::ProtocolParams;

fn main() -> ecs_diqkd::Result<()> {
    let params = ProtocolParams::default();
    println!(
        "{:>6} {:>10} {:>12} {:>12} {:>10}",
        "L_km", "mu*", "R(mu*)", "audit best", "zero"
    );
    for distance in (0..=600).step_by(50) {
        let l = distance as f64;
        let best = optimize_mu(l, &params)?;
        let audit = audit_mu(l, &params, AUDIT_POINTS)?;
        println!(
            "{l:>6} {:>10.5} {:>12.4e} {:>12.4e} {:>10}",
            best.mu, best.rate, audit.rate, best.zero_rate
        );
        assert!(
            best.rate >= audit.rate - 1e-12,
            "optimizer lost to the audit grid at {l} km"
        );
    }
    Ok(())
}
