//! Physical inputs and the heralded statistics derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tsirelson's bound `2√2`.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Slack allowed on probability-valued fields before a triple is rejected.
const STATS_TOLERANCE: f64 = 1e-9;

/// Every physical input of one protocol evaluation.
///
/// Distances are the total Alice–Bob separation; the central station sits at
/// the midpoint, which only [`crate::rates::channel_efficiency`] accounts for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Coherent-state intensity `μ = |α|²`.
    pub mu: f64,
    /// Fiber loss in dB/km.
    pub beta_db_per_km: f64,
    /// Detector efficiency.
    pub eta_d: f64,
    /// Dark-count probability per detector per gate.
    pub p_d: f64,
    /// Optical misalignment error `(1 − cos δ₀)/2`.
    pub e_d: f64,
    /// Alice–Bob distance in km.
    pub distance_km: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            mu: 0.1,
            beta_db_per_km: 0.2,
            eta_d: 0.8,
            p_d: 1e-7,
            e_d: 0.0,
            distance_km: 0.0,
        }
    }
}

impl ProtocolParams {
    pub fn new(mu: f64, beta_db_per_km: f64, eta_d: f64, p_d: f64, e_d: f64, distance_km: f64) -> Result<Self> {
        let params = Self {
            mu,
            beta_db_per_km,
            eta_d,
            p_d,
            e_d,
            distance_km,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_distance(self, distance_km: f64) -> Self {
        Self { distance_km, ..self }
    }

    /// Checks every field except `mu`, which optimizers override.
    pub fn validate_channel(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::InvalidParams(msg)) };
        check(
            self.eta_d > 0.0 && self.eta_d <= 1.0,
            format!("eta_d must lie in (0, 1], got {}", self.eta_d),
        )?;
        check(
            (0.0..1.0).contains(&self.p_d),
            format!("p_d must lie in [0, 1), got {}", self.p_d),
        )?;
        check(
            (0.0..=0.5).contains(&self.e_d),
            format!("e_d must lie in [0, 0.5], got {}", self.e_d),
        )?;
        check(
            self.distance_km >= 0.0 && self.distance_km.is_finite(),
            format!("distance_km must be finite and >= 0, got {}", self.distance_km),
        )?;
        check(
            self.beta_db_per_km >= 0.0 && self.beta_db_per_km.is_finite(),
            format!("beta_db_per_km must be finite and >= 0, got {}", self.beta_db_per_km),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "mu must be finite and > 0, got {}",
                self.mu
            )));
        }
        self.validate_channel()
    }

    /// Single-arm transmittance `η` for these parameters.
    pub fn eta(&self) -> f64 {
        crate::rates::channel_efficiency(self.distance_km, self.beta_db_per_km, self.eta_d)
    }
}

/// The heralded-statistics triple `(Q_zz, S, e_zz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorStats {
    /// Heralded gain in the Z basis.
    pub q_zz: f64,
    /// CHSH value. Strong misalignment can drive it below zero, never past `±2√2`.
    pub s: f64,
    /// Z-basis bit error rate after the D2 flip rule.
    pub e_zz: f64,
}

impl DetectorStats {
    pub fn new(q_zz: f64, s: f64, e_zz: f64) -> Result<Self> {
        let stats = Self { q_zz, s, e_zz };
        stats.validate()?;
        Ok(stats)
    }

    pub fn validate(&self) -> Result<()> {
        let t = STATS_TOLERANCE;
        if !(-t..=1.0 + t).contains(&self.q_zz) {
            return Err(crate::error::domain("q_zz", self.q_zz));
        }
        if !(-t..=1.0 + t).contains(&self.e_zz) {
            return Err(crate::error::domain("e_zz", self.e_zz));
        }
        if !(-TSIRELSON - t..=TSIRELSON + t).contains(&self.s) {
            return Err(crate::error::domain("CHSH value", self.s));
        }
        Ok(())
    }

    /// Largest absolute field-wise difference.
    pub fn max_abs_diff(&self, other: &DetectorStats) -> f64 {
        (self.q_zz - other.q_zz)
            .abs()
            .max((self.s - other.s).abs())
            .max((self.e_zz - other.e_zz).abs())
    }
}

/// A key rate together with the statistics and inputs it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyRatePoint {
    /// Secret key bits per trial, clamped at zero.
    pub rate: f64,
    pub stats: DetectorStats,
    pub params: ProtocolParams,
}
