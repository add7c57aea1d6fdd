//! One-dimensional maximization of the ECS key rate over the intensity `μ`.
//!
//! A log-spaced grid seeds the search and a golden-section pass refines the
//! best bracket. [`audit_mu`] evaluates a much finer grid so callers can
//! certify the result.

use serde::Serialize;

use crate::error::Result;
use crate::params::ProtocolParams;
use crate::rates::{ecs_misaligned_stats, key_rate};

pub const MU_MIN: f64 = 1e-4;
pub const MU_MAX: f64 = 1.0;
pub const COARSE_POINTS: usize = 200;
pub const AUDIT_POINTS: usize = 2000;

const GOLDEN_REL_TOL: f64 = 1e-10;

/// Outcome of [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizedMu {
    pub mu: f64,
    pub rate: f64,
    /// The rate vanished everywhere on the seed grid; `mu` is the interval midpoint.
    pub zero_rate: bool,
}

/// `n` points spaced evenly in `ln μ` over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Maximizes `f` on `[lo, hi]` by golden-section search.
///
/// Returns the best abscissa seen and its value. `f` should be unimodal on
/// the interval for the answer to be the global maximum there.
pub fn golden_section_max<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > rel_tol * (x1.abs() + x2.abs()).max(f64::MIN_POSITIVE) {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// ECS key rate at intensity `mu` with the channel of `params` at `distance_km`.
pub fn ecs_rate(mu: f64, distance_km: f64, params: &ProtocolParams) -> Result<f64> {
    let eta = params.with_distance(distance_km).eta();
    Ok(key_rate(&ecs_misaligned_stats(mu, eta, params.p_d, params.e_d)?))
}

/// Intensity maximizing the ECS key rate at `distance_km`.
///
/// `params.mu` and `params.distance_km` are ignored.
pub fn optimize_mu(distance_km: f64, params: &ProtocolParams) -> Result<OptimizedMu> {
    params.with_distance(distance_km).validate_channel()?;
    let grid = log_grid(MU_MIN, MU_MAX, COARSE_POINTS);
    let rates = grid
        .iter()
        .map(|&mu| ecs_rate(mu, distance_km, params))
        .collect::<Result<Vec<_>>>()?;
    let (best, &best_rate) = rates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if best_rate <= 0.0 {
        return Ok(OptimizedMu {
            mu: 0.5 * (MU_MIN + MU_MAX),
            rate: 0.0,
            zero_rate: true,
        });
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (mu, rate) = golden_section_max(|mu| ecs_rate(mu, distance_km, params), lo, hi, GOLDEN_REL_TOL)?;
    Ok(if rate >= best_rate {
        OptimizedMu {
            mu,
            rate,
            zero_rate: false,
        }
    } else {
        OptimizedMu {
            mu: grid[best],
            rate: best_rate,
            zero_rate: false,
        }
    })
}

/// Best point of a fine log grid, for certifying [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuAudit {
    pub mu: f64,
    pub rate: f64,
}

pub fn audit_mu(distance_km: f64, params: &ProtocolParams, points: usize) -> Result<MuAudit> {
    let mut best = MuAudit {
        mu: MU_MIN,
        rate: f64::NEG_INFINITY,
    };
    for mu in log_grid(MU_MIN, MU_MAX, points) {
        let rate = ecs_rate(mu, distance_km, params)?;
        if rate > best.rate {
            best = MuAudit { mu, rate };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_channel() -> ProtocolParams {
        ProtocolParams::default()
    }

    #[test]
    fn log_grid_endpoints_and_spacing() {
        let g = log_grid(1e-4, 1.0, 5);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[4], 1.0);
        assert!((g[2] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 0.3).powi(2) + 2.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn beats_the_audit_grid_at_zero_distance() {
        let p = standard_channel();
        let opt = optimize_mu(0.0, &p).unwrap();
        let audit = audit_mu(0.0, &p, AUDIT_POINTS).unwrap();
        assert!(!opt.zero_rate);
        assert!(opt.rate >= audit.rate - 1e-12);
        assert!((opt.mu - audit.mu).abs() < 2e-3);
    }

    #[test]
    fn far_distance_is_flagged() {
        let opt = optimize_mu(2000.0, &standard_channel()).unwrap();
        assert!(opt.zero_rate);
        assert_eq!(opt.rate, 0.0);
        assert_eq!(opt.mu, 0.5 * (MU_MIN + MU_MAX));
    }

    #[test]
    fn optimum_respects_ideal_violation_threshold() {
        let p = standard_channel();
        for l in (0..=450).step_by(50) {
            let opt = optimize_mu(l as f64, &p).unwrap();
            if opt.rate > 0.0 {
                assert!(opt.mu <= 0.4407, "L={l} mu*={}", opt.mu);
            }
        }
    }
}
