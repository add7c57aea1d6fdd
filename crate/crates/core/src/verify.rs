//! Closed forms versus the Fock-space oracle over a parameter grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::oracle::{oracle_report, OracleConfig};
use crate::params::DetectorStats;
use crate::rates::{ecs_misaligned_stats, misaligned_e_zz_literal};

/// Absolute agreement required between closed forms and oracle.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyPoint {
    pub mu: f64,
    pub eta: f64,
    pub p_d: f64,
    pub e_d: f64,
}

impl VerifyPoint {
    pub fn new(mu: f64, eta: f64, p_d: f64, e_d: f64) -> Self {
        Self { mu, eta, p_d, e_d }
    }
}

impl std::fmt::Display for VerifyPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(mu={}, eta={}, p_d={}, e_d={})",
            self.mu, self.eta, self.p_d, self.e_d
        )
    }
}

/// μ ∈ {0.01, 0.05, 0.1, 0.25, 0.5} × η ∈ {0.05, 0.2, 0.5, 1} ×
/// p_d ∈ {0, 1e-7, 1e-5} × e_d ∈ {0, 0.01, 0.07}.
pub fn default_grid() -> Vec<VerifyPoint> {
    let mut out = Vec::with_capacity(180);
    for &mu in &[0.01, 0.05, 0.1, 0.25, 0.5] {
        for &eta in &[0.05, 0.2, 0.5, 1.0] {
            for &p_d in &[0.0, 1e-7, 1e-5] {
                for &e_d in &[0.0, 0.01, 0.07] {
                    out.push(VerifyPoint::new(mu, eta, p_d, e_d));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub point: VerifyPoint,
    pub closed_form: Option<DetectorStats>,
    pub oracle: Option<DetectorStats>,
    /// `e_zz` from the literal `η_d` reading of the misaligned formula.
    pub literal_e_zz: Option<f64>,
    pub error: Option<String>,
}

impl PointResult {
    fn deviation(&self, field: fn(&DetectorStats) -> f64) -> Option<f64> {
        Some((field(self.closed_form.as_ref()?) - field(self.oracle.as_ref()?)).abs())
    }
}

/// Largest deviation of one field and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldDeviation {
    pub max_abs: f64,
    pub worst: Option<VerifyPoint>,
}

/// Which reading of the misaligned `e_zz` numerator the oracle supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EzzReading {
    /// Arm transmittance `η` in the numerator exponent.
    Eta,
    /// Detector efficiency `η_d`, as literally printed.
    EtaD,
    /// Neither reading is within tolerance, or no misaligned point was checked.
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub points: Vec<PointResult>,
    pub q_zz: FieldDeviation,
    pub s: FieldDeviation,
    pub e_zz: FieldDeviation,
    pub reading: EzzReading,
    /// Largest oracle mismatch of each reading over points with `e_d > 0`.
    pub eta_reading_deviation: f64,
    pub eta_d_reading_deviation: f64,
    pub tolerance: f64,
}

impl VerifyReport {
    pub fn failed_points(&self) -> impl Iterator<Item = &PointResult> {
        self.points.iter().filter(|p| p.error.is_some())
    }

    pub fn passed(&self) -> bool {
        self.failed_points().next().is_none()
            && [self.q_zz, self.s, self.e_zz]
                .iter()
                .all(|f| f.max_abs < self.tolerance)
    }

    /// Human-readable summary, one fact per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let line = |name: &str, f: &FieldDeviation| {
            let at = f.worst.map(|p| format!(" at {p}")).unwrap_or_default();
            format!("max |d{name}| = {:.3e}{at}\n", f.max_abs)
        };
        out += &format!("points checked: {}\n", self.points.len());
        out += &line("Q_zz", &self.q_zz);
        out += &line("S", &self.s);
        out += &line("e_zz", &self.e_zz);
        for p in self.failed_points() {
            out += &format!("error at {}: {}\n", p.point, p.error.as_deref().unwrap_or(""));
        }
        out += &format!(
            "misaligned e_zz reading: {} (eta: {:.3e}, eta_d: {:.3e})\n",
            match self.reading {
                EzzReading::Eta => "eta",
                EzzReading::EtaD => "eta_d",
                EzzReading::Undetermined => "undetermined",
            },
            self.eta_reading_deviation,
            self.eta_d_reading_deviation
        );
        out += if self.passed() { "PASS\n" } else { "FAIL\n" };
        out
    }
}

/// Standard closed form used by [`verify`].
pub fn closed_form(point: &VerifyPoint) -> Result<DetectorStats> {
    ecs_misaligned_stats(point.mu, point.eta, point.p_d, point.e_d)
}

pub fn verify(points: &[VerifyPoint], config: &OracleConfig, eta_d: f64) -> VerifyReport {
    verify_with(points, config, eta_d, closed_form)
}

/// Compares `closed` against the oracle on every point. `eta_d` feeds the
/// literal reading of the misaligned `e_zz`.
pub fn verify_with<F>(points: &[VerifyPoint], config: &OracleConfig, eta_d: f64, closed: F) -> VerifyReport
where
    F: Fn(&VerifyPoint) -> Result<DetectorStats> + Sync,
{
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|p| {
            let closed = closed(p);
            let oracle = oracle_report(config, p.mu, p.eta, p.p_d, p.e_d).map(|r| r.stats);
            let error = match (&closed, &oracle) {
                (Err(e), _) => Some(format!("closed form: {e}")),
                (_, Err(e)) => Some(format!("oracle: {e}")),
                _ => None,
            };
            PointResult {
                point: *p,
                closed_form: closed.ok(),
                oracle: oracle.ok(),
                literal_e_zz: Some(misaligned_e_zz_literal(p.mu, p.eta, eta_d, p.p_d, p.e_d)),
                error,
            }
        })
        .collect();

    let field = |get: fn(&DetectorStats) -> f64| {
        results.iter().fold(
            FieldDeviation {
                max_abs: 0.0,
                worst: None,
            },
            |acc, r| match r.deviation(get) {
                // NaN counts as the worst possible deviation.
                Some(d) if !(d <= acc.max_abs) => FieldDeviation {
                    max_abs: if d.is_nan() { f64::INFINITY } else { d },
                    worst: Some(r.point),
                },
                _ => acc,
            },
        )
    };
    let q_zz = field(|s| s.q_zz);
    let s = field(|s| s.s);
    let e_zz = field(|s| s.e_zz);

    let mut eta_dev: f64 = 0.0;
    let mut eta_d_dev: f64 = 0.0;
    let mut misaligned = 0;
    for r in results.iter().filter(|r| r.point.e_d > 0.0) {
        let (Some(c), Some(o), Some(lit)) = (r.closed_form, r.oracle, r.literal_e_zz) else {
            continue;
        };
        misaligned += 1;
        eta_dev = eta_dev.max((c.e_zz - o.e_zz).abs());
        let d = (lit - o.e_zz).abs();
        eta_d_dev = eta_d_dev.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    let reading = if misaligned == 0 {
        EzzReading::Undetermined
    } else if eta_dev < VERIFY_TOLERANCE && eta_dev <= eta_d_dev {
        EzzReading::Eta
    } else if eta_d_dev < VERIFY_TOLERANCE {
        EzzReading::EtaD
    } else {
        EzzReading::Undetermined
    };

    VerifyReport {
        points: results,
        q_zz,
        s,
        e_zz,
        reading,
        eta_reading_deviation: eta_dev,
        eta_d_reading_deviation: eta_d_dev,
        tolerance: VERIFY_TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 180);
        assert!(g.contains(&VerifyPoint::new(0.25, 1.0, 1e-7, 0.07)));
    }

    #[test]
    fn ideal_point_agrees_to_rounding() {
        let rep = verify(&[VerifyPoint::new(0.25, 1.0, 0.0, 0.0)], &OracleConfig::default(), 0.8);
        assert!(rep.passed());
        assert!(rep.q_zz.max_abs < 1e-13 && rep.s.max_abs < 1e-13 && rep.e_zz.max_abs < 1e-13);
        assert_eq!(rep.reading, EzzReading::Undetermined);
    }

    #[test]
    fn corrupted_closed_form_is_caught() {
        let pts = [
            VerifyPoint::new(0.1, 0.5, 1e-7, 0.0),
            VerifyPoint::new(0.25, 0.2, 0.0, 0.01),
        ];
        let bad = pts[1];
        let rep = verify_with(&pts, &OracleConfig::default(), 0.8, |p| {
            let mut st = closed_form(p)?;
            if *p == bad {
                st.s += 1e-6;
            }
            Ok(st)
        });
        assert!(!rep.passed());
        assert_eq!(rep.s.worst, Some(bad));
        assert!(rep.render().contains("FAIL"));
    }

    #[test]
    fn oracle_errors_are_reported_per_point() {
        let cfg = OracleConfig { n_max: 4 };
        let rep = verify(&[VerifyPoint::new(0.5, 0.5, 0.0, 0.0)], &cfg, 0.8);
        assert!(!rep.passed());
        assert_eq!(rep.failed_points().count(), 1);
    }
}
