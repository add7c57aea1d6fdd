//! CHSH value of the lossless entangled coherent state as a function of the
//! intensity, and the intensity where the violation disappears.
//!
//! ```bash
//! cargo run --example ideal_violation
//! ```

use ecs_diqkd::rates::{ecs_ideal_stats, key_rate};

fn main() -> ecs_diqkd::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>10}", "mu", "Q_zz", "S", "R");
    for mu in [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.4407, 0.5, 0.75, 1.0] {
        let st = ecs_ideal_stats(mu)?;
        println!("{mu:>8} {:>10.6} {:>10.6} {:>10.6}", st.q_zz, st.s, key_rate(&st));
    }

    // S(mu) decreases monotonically, so bisection on S - 2 is enough.
    let (mut lo, mut hi) = (0.01, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ecs_ideal_stats(mid)?.s > 2.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!();
    println!("S = 2 at mu = {:.10}", 0.5 * (lo + hi));
    println!("closed form -ln(sqrt2 - 1)/2 = {:.10}", -(2f64.sqrt() - 1.0).ln() / 2.0);
    Ok(())
}
