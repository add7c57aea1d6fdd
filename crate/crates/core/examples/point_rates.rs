//! Heralded statistics and key rates of both protocols at one distance,
//! next to the repeaterless bound.
//!
//! ```bash
//! cargo run --example point_rates -- 250 0.07
//! ```
//!
//! Arguments are the distance in km (default 200) and the misalignment
//! error (default 0).

use ecs_diqkd::optimize::optimize_mu;
use ecs_diqkd::rates::{evaluate_bell, evaluate_ecs, plob_bound};
use ecs_diqkd::ProtocolParams;

fn main() -> ecs_diqkd::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<f64>().expect("numeric argument"));
    let distance = args.next().unwrap_or(200.0);
    let e_d = args.next().unwrap_or(0.0);

    let base = ProtocolParams {
        e_d,
        distance_km: distance,
        ..ProtocolParams::default()
    };
    println!("L = {distance} km, eta = {:.4e} per arm, e_d = {e_d}", base.eta());

    for mu in [0.05, 0.1, 0.2] {
        let p = evaluate_ecs(&base.with_mu(mu))?;
        println!(
            "ECS  mu={mu:<6} Q_zz={:.4e} S={:.5} e_zz={:.4e} R={:.4e}",
            p.stats.q_zz, p.stats.s, p.stats.e_zz, p.rate
        );
    }
    let best = optimize_mu(distance, &base)?;
    println!("ECS  optimal mu={:.5} R={:.4e}", best.mu, best.rate);

    let bell = evaluate_bell(&base)?;
    println!(
        "Bell            Q_zz={:.4e} S={:.5} e_zz={:.4e} R={:.4e}",
        bell.stats.q_zz, bell.stats.s, bell.stats.e_zz, bell.rate
    );
    println!(
        "PLOB            R={:.4e}",
        plob_bound(distance, base.beta_db_per_km, base.eta_d)?
    );
    Ok(())
}
