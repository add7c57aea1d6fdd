//! Closed-form heralded statistics, the device-independent key rate, the
//! Bell-state baseline and the repeaterless capacity bound.
//!
//! All functions are pure. The statistics functions take the single-arm
//! transmittance `η` directly; use [`channel_efficiency`] to obtain it from a
//! distance.
//!
//! The published expressions subtract nearly equal exponentials when `μη` is
//! small and `p_d ≈ 1e-7`. Each formula here is an exact algebraic
//! rearrangement written with `expm1`, checked against the literal
//! expressions in the tests below.

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{domain, Error, Result};
use crate::params::{DetectorStats, KeyRatePoint, ProtocolParams, TSIRELSON};

/// Binary Shannon entropy in bits, with `H₂(0) = H₂(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("binary entropy argument", x));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-(x * x.ln() + (1.0 - x) * (-x).ln_1p()) / LN_2)
}

/// Asymptotic device-independent key rate per trial.
///
/// Returns zero without touching the square root when `S ≤ 2`, and clamps a
/// negative bracket to zero.
pub fn key_rate(stats: &DetectorStats) -> f64 {
    if !(stats.s > 2.0) || stats.q_zz <= 0.0 {
        return 0.0;
    }
    let half = (stats.s / 2.0).min(SQRT_2);
    let chsh_arg = ((1.0 + (half * half - 1.0).sqrt()) / 2.0).clamp(0.0, 1.0);
    let e_zz = stats.e_zz.clamp(0.0, 1.0);
    let h_e = binary_entropy(e_zz).unwrap_or(1.0);
    let h_s = binary_entropy(chsh_arg).unwrap_or(1.0);
    let rate = stats.q_zz * (1.0 - h_e - h_s);
    rate.clamp(0.0, stats.q_zz)
}

/// Single-arm transmittance `η = η_d·10^(−β(L/2)/10)`.
///
/// The central station sits midway, so each pulse crosses half the distance.
pub fn channel_efficiency(distance_km: f64, beta_db_per_km: f64, eta_d: f64) -> f64 {
    eta_d * 10f64.powf(-beta_db_per_km * (distance_km / 2.0) / 10.0)
}

/// Lossless channel, ideal threshold detectors.
pub fn ecs_ideal_stats(mu: f64) -> Result<DetectorStats> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(domain("mu", mu));
    }
    let q_zz = -(-2.0 * mu).exp_m1();
    let s = SQRT_2 * (1.0 + (-2.0 * mu).exp());
    DetectorStats::new(q_zz, s, 0.0)
}

fn check_lossy_inputs(mu: f64, eta: f64, p_d: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(domain("mu", mu));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(domain("eta", eta));
    }
    if !(0.0..1.0).contains(&p_d) {
        return Err(domain("p_d", p_d));
    }
    Ok(())
}

/// Symmetric lossy channel with threshold detectors and dark counts.
pub fn ecs_lossy_stats(mu: f64, eta: f64, p_d: f64) -> Result<DetectorStats> {
    check_lossy_inputs(mu, eta, p_d)?;
    // u: photon budget reaching Charlie; y: the part lost in the fibers.
    let u = 2.0 * mu * eta;
    let y = 2.0 * mu * (1.0 - eta);
    let x = u + y;

    // Q = (1-p_d)[1 - (1-2p_d)e^{-u}]
    let q_zz = (1.0 - p_d) * (-(-u).exp_m1() + 2.0 * p_d * (-u).exp());

    // e^{2μ} - (1-2p_d)e^{2μ(1-η)} = e^{y}[expm1(u) + 2p_d]
    let scaled_den = u.exp_m1() + 2.0 * p_d;
    if !(scaled_den > 0.0) {
        return Err(Error::Domain {
            what: "lossy-statistics denominator",
            value: scaled_den,
        });
    }
    // sinh x - cosh y + (1-p_d)e^{-y} = sinh x - sinh y - p_d e^{-y}
    let sinh_diff = 2.0 * ((x + y) / 2.0).cosh() * (u / 2.0).sinh();
    let s_num = (sinh_diff - p_d * (-y).exp()) * (-y).exp();
    let s = TSIRELSON * s_num / scaled_den;
    let e_zz = p_d / scaled_den;
    DetectorStats::new(q_zz, s, e_zz)
}

/// Lossy channel plus a fixed relative phase drift between the two arms.
///
/// The Z-basis error numerator uses the arm transmittance `η`; see
/// [`misaligned_e_zz_literal`] for the alternative reading with `η_d`.
pub fn ecs_misaligned_stats(mu: f64, eta: f64, p_d: f64, e_d: f64) -> Result<DetectorStats> {
    check_lossy_inputs(mu, eta, p_d)?;
    if !(0.0..=0.5).contains(&e_d) {
        return Err(domain("e_d", e_d));
    }
    let u = 2.0 * mu * eta;
    let y = 2.0 * mu * (1.0 - eta);
    let bright = (u * (1.0 - e_d)).exp_m1();
    let dim = (u * e_d).exp_m1();

    // Every bracket of the published form equals e^{±·}[bright + dim + 2p_d].
    let scaled = bright + dim + 2.0 * p_d;
    if !(scaled > 0.0) {
        return Err(Error::Domain {
            what: "misaligned-statistics denominator",
            value: scaled,
        });
    }
    let q_zz = (1.0 - p_d) * (-u).exp() * scaled;

    // w/2 = sinh p - cosh q + (1-p_d)e^{-y}
    //     = sinh p - sinh q - e^{-y} expm1(-u e_d) - p_d e^{-y}
    let p = y + u * (1.0 - e_d);
    let q = y + u * e_d;
    let sinh_diff = 2.0 * ((p + q) / 2.0).cosh() * (u * (1.0 - 2.0 * e_d) / 2.0).sinh();
    let half_w = sinh_diff - (-y).exp() * ((-u * e_d).exp_m1() + p_d);
    let s = TSIRELSON * half_w * (-y).exp() / scaled;

    let e_zz = (dim + p_d) / scaled;
    DetectorStats::new(q_zz, s, e_zz)
}

/// Misaligned Z-basis error evaluated with `η_d` in the numerator exponent,
/// exactly as printed in the source. Kept for adjudication against the oracle.
pub fn misaligned_e_zz_literal(mu: f64, eta: f64, eta_d: f64, p_d: f64, e_d: f64) -> f64 {
    let exp = f64::exp;
    let num = exp(2.0 * mu * (1.0 - eta_d + eta * e_d)) - (1.0 - p_d) * exp(2.0 * mu * (1.0 - eta));
    let den = exp(2.0 * mu * (1.0 - eta * e_d)) + exp(2.0 * mu * (1.0 - eta + eta * e_d))
        - 2.0 * (1.0 - p_d) * exp(2.0 * mu * (1.0 - eta));
    num / den
}

/// Heralded Bell-state scheme with two-photon interference at the station.
pub fn bell_state_stats(eta: f64, p_d: f64) -> Result<DetectorStats> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(domain("eta", eta));
    }
    if !(0.0..1.0).contains(&p_d) {
        return Err(domain("p_d", p_d));
    }
    let one_m = 1.0 - p_d;
    let q_zz =
        one_m * one_m * (eta * eta / 2.0 + (4.0 * eta - 3.0 * eta * eta) * p_d + 4.0 * (1.0 - eta).powi(2) * p_d * p_d);
    let dark = 8.0 * eta * (1.0 - 2.0 * p_d) * p_d + 8.0 * p_d * p_d;
    let den = dark + eta * eta * (1.0 - 6.0 * p_d + 8.0 * p_d * p_d);
    if !(den > 0.0) {
        return Err(Error::Domain {
            what: "Bell-state denominator",
            value: den,
        });
    }
    let s = TSIRELSON * eta * eta * one_m / den;
    // ½{1 - η²(1-2p_d)/D} with the η² terms cancelled
    let e_zz = 0.5 * (dark + eta * eta * (8.0 * p_d * p_d - 4.0 * p_d)) / den;
    DetectorStats::new(q_zz, s, e_zz)
}

/// Repeaterless capacity `−log₂(1 − η_AB)` over the full Alice–Bob fiber.
pub fn plob_bound(distance_km: f64, beta_db_per_km: f64, eta_d: f64) -> Result<f64> {
    let eta_ab = eta_d * 10f64.powf(-beta_db_per_km * distance_km / 10.0);
    plob_from_transmittance(eta_ab)
}

/// `−log₂(1 − η)` for an end-to-end transmittance.
pub fn plob_from_transmittance(eta_ab: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta_ab) {
        return Err(domain("end-to-end transmittance", eta_ab));
    }
    Ok(-(-eta_ab).ln_1p() / LN_2)
}

/// ECS statistics and key rate for a full parameter set.
pub fn evaluate_ecs(params: &ProtocolParams) -> Result<KeyRatePoint> {
    params.validate()?;
    let stats = ecs_misaligned_stats(params.mu, params.eta(), params.p_d, params.e_d)?;
    Ok(KeyRatePoint {
        rate: key_rate(&stats),
        stats,
        params: *params,
    })
}

/// Bell-state baseline rate at the distance in `params` (`mu` is ignored).
pub fn evaluate_bell(params: &ProtocolParams) -> Result<KeyRatePoint> {
    params.validate_channel()?;
    let stats = bell_state_stats(params.eta(), params.p_d)?;
    Ok(KeyRatePoint {
        rate: key_rate(&stats),
        stats,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Literal transcriptions of the published closed forms.
    fn lossy_literal(mu: f64, eta: f64, p_d: f64) -> DetectorStats {
        let e = f64::exp;
        let q = (1.0 - p_d) * (1.0 - (1.0 - 2.0 * p_d) * e(-2.0 * mu * eta));
        let den = e(2.0 * mu) - (1.0 - 2.0 * p_d) * e(2.0 * mu * (1.0 - eta));
        let s = TSIRELSON
            * ((2.0 * mu).sinh() - (2.0 * mu * (1.0 - eta)).cosh() + (1.0 - p_d) * e(-2.0 * mu * (1.0 - eta)))
            / den;
        let ezz = p_d * e(2.0 * mu * (1.0 - eta)) / den;
        DetectorStats { q_zz: q, s, e_zz: ezz }
    }

    fn misaligned_literal(mu: f64, eta: f64, p_d: f64, e_d: f64) -> DetectorStats {
        let e = f64::exp;
        let q = (1.0 - p_d)
            * (e(-2.0 * mu * eta * e_d) + e(2.0 * mu * (-eta + eta * e_d)) - 2.0 * (1.0 - p_d) * e(-2.0 * mu * eta));
        let den = e(2.0 * mu * (1.0 - eta * e_d)) + e(2.0 * mu * (1.0 - eta + eta * e_d))
            - 2.0 * (1.0 - p_d) * e(2.0 * mu * (1.0 - eta));
        let w = 2.0 * (2.0 * mu * (1.0 - eta * e_d)).sinh() - 2.0 * (2.0 * mu * (1.0 - eta + eta * e_d)).cosh()
            + 2.0 * (1.0 - p_d) * e(-2.0 * mu * (1.0 - eta));
        let ezz = (e(2.0 * mu * (1.0 - eta + eta * e_d)) - (1.0 - p_d) * e(2.0 * mu * (1.0 - eta))) / den;
        DetectorStats {
            q_zz: q,
            s: SQRT_2 * w / den,
            e_zz: ezz,
        }
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(close(binary_entropy(0.11).unwrap(), 0.499915958164528, 1e-12));
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn key_rate_examples() {
        let perfect = DetectorStats {
            q_zz: 1.0,
            s: TSIRELSON,
            e_zz: 0.0,
        };
        assert!(close(key_rate(&perfect), 1.0, 1e-12));
        let classical = DetectorStats {
            q_zz: 0.5,
            s: 2.0,
            e_zz: 0.0,
        };
        assert_eq!(key_rate(&classical), 0.0);
        // direct high-precision evaluation of the bracket
        let mid = DetectorStats {
            q_zz: 0.3935,
            s: 2.272,
            e_zz: 0.0,
        };
        let r = key_rate(&mid);
        assert!(close(r, 0.087_002_037_652_795_56, 1e-12), "{r}");
        assert!(r > 0.0 && r < 0.3935);
    }

    #[test]
    fn key_rate_clamps_negative_bracket() {
        let noisy = DetectorStats {
            q_zz: 0.2,
            s: 2.1,
            e_zz: 0.2,
        };
        assert_eq!(key_rate(&noisy), 0.0);
        let above = DetectorStats {
            q_zz: 0.2,
            s: TSIRELSON + 1e-12,
            e_zz: 0.0,
        };
        assert!(close(key_rate(&above), 0.2, 1e-9));
    }

    #[test]
    fn channel_efficiency_examples() {
        assert_eq!(channel_efficiency(0.0, 0.2, 0.8), 0.8);
        assert!(close(channel_efficiency(100.0, 0.2, 0.8), 0.08, 1e-15));
        assert_eq!(channel_efficiency(100.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn ideal_examples() {
        let st = ecs_ideal_stats(0.25).unwrap();
        assert!(close(st.q_zz, 0.393_469_340_287_366_6, 1e-12));
        assert!(close(st.s, 2.271_977_447_333_802, 1e-12));
        assert_eq!(st.e_zz, 0.0);
        let tiny = ecs_ideal_stats(1e-9).unwrap();
        assert!(tiny.q_zz < 1e-8);
        assert!(close(tiny.s, TSIRELSON, 1e-8));
        assert!(close(ecs_ideal_stats(0.44069).unwrap().s, 2.0, 1e-4));
        assert!(ecs_ideal_stats(0.0).is_err());
    }

    #[test]
    fn lossy_examples() {
        let a = ecs_lossy_stats(0.25, 1.0, 0.0).unwrap();
        let b = ecs_ideal_stats(0.25).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert_eq!(ecs_lossy_stats(0.25, 0.5, 0.0).unwrap().e_zz, 0.0);
        assert!(ecs_lossy_stats(0.25, 0.0, 0.0).is_err());
        assert!(ecs_lossy_stats(0.25, 0.5, 1.0).is_err());
    }

    #[test]
    fn stable_forms_match_literal_formulas() {
        for &mu in &[0.01, 0.1, 0.25, 0.5, 1.0] {
            for &eta in &[0.05, 0.2, 0.5, 0.9, 1.0] {
                for &p_d in &[0.0, 1e-7, 1e-5, 1e-3] {
                    let stable = ecs_lossy_stats(mu, eta, p_d).unwrap();
                    let lit = lossy_literal(mu, eta, p_d);
                    assert!(stable.max_abs_diff(&lit) < 1e-10, "{mu} {eta} {p_d}");
                    for &e_d in &[0.0, 0.01, 0.07, 0.3, 0.5] {
                        let stable = ecs_misaligned_stats(mu, eta, p_d, e_d).unwrap();
                        let lit = misaligned_literal(mu, eta, p_d, e_d);
                        assert!(stable.max_abs_diff(&lit) < 1e-10, "{mu} {eta} {p_d} {e_d}");
                    }
                }
            }
        }
    }

    #[test]
    fn misaligned_reduces_and_decoheres() {
        for &mu in &[0.05, 0.1, 0.4] {
            let a = ecs_misaligned_stats(mu, 0.08, 1e-7, 0.0).unwrap();
            let b = ecs_lossy_stats(mu, 0.08, 1e-7).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
        let full = ecs_misaligned_stats(0.1, 0.08, 0.0, 0.5).unwrap();
        assert!(close(full.e_zz, 0.5, 1e-12));
    }

    #[test]
    fn literal_e_zz_agrees_only_when_eta_equals_eta_d() {
        let st = ecs_misaligned_stats(0.1, 0.8, 1e-7, 0.01).unwrap();
        assert!(close(
            misaligned_e_zz_literal(0.1, 0.8, 0.8, 1e-7, 0.01),
            st.e_zz,
            1e-12
        ));
        let st = ecs_misaligned_stats(0.1, 0.08, 1e-7, 0.01).unwrap();
        assert!(misaligned_e_zz_literal(0.1, 0.08, 0.8, 1e-7, 0.01) < 0.0);
        assert!(st.e_zz > 0.0);
    }

    #[test]
    fn bell_examples() {
        let st = bell_state_stats(1.0, 0.0).unwrap();
        assert!(close(st.q_zz, 0.5, 1e-15) && close(st.s, TSIRELSON, 1e-15) && st.e_zz == 0.0);
        let st = bell_state_stats(0.5, 0.0).unwrap();
        assert!(close(st.q_zz, 0.125, 1e-15) && close(st.s, TSIRELSON, 1e-15) && st.e_zz == 0.0);
        let st = bell_state_stats(0.08, 1e-7).unwrap();
        assert!(st.s < TSIRELSON && st.e_zz > 0.0);
        // literal e_zz
        let (eta, p_d) = (0.08_f64, 1e-7_f64);
        let den =
            8.0 * eta * (1.0 - 2.0 * p_d) * p_d + 8.0 * p_d * p_d + eta * eta * (1.0 - 6.0 * p_d + 8.0 * p_d * p_d);
        let lit = 0.5 * (1.0 - eta * eta * (1.0 - 2.0 * p_d) / den);
        assert!(close(st.e_zz, lit, 1e-12));
        assert!(bell_state_stats(0.0, 0.0).is_err());
    }

    #[test]
    fn plob_examples() {
        assert!(close(plob_from_transmittance(0.5).unwrap(), 1.0, 1e-15));
        assert!(close(
            plob_bound(100.0, 0.2, 0.8).unwrap(),
            0.011_587_974_275_211_846,
            1e-12
        ));
        let tiny = 1e-9;
        assert!(close(plob_from_transmittance(tiny).unwrap(), tiny / LN_2, 1e-17));
        assert!(plob_bound(0.0, 0.2, 1.0).is_err());
        let mut last = f64::INFINITY;
        for l in 0..50 {
            let v = plob_bound(l as f64 * 10.0, 0.2, 0.8).unwrap();
            assert!(v < last);
            last = v;
        }
    }
}
