//! Threshold detectors with independent dark counts.

use serde::Serialize;

use crate::error::Result;

use super::fock::TruncatedOpticalState;

/// Which detectors fired in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Herald {
    D1Only,
    D2Only,
    None,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeraldOutcome {
    pub which: Herald,
    pub probability: f64,
}

/// No-click probabilities of the two detector modes, before dark counts.
///
/// Linear in the state, so contributions from ensemble components add up.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VacuumProbabilities {
    /// `P(n_c = 0)`
    pub v1: f64,
    /// `P(n_d = 0)`
    pub v2: f64,
    /// `P(n_c = 0 ∧ n_d = 0)`
    pub v12: f64,
    /// Total probability weight (trace) of the contribution.
    pub weight: f64,
}

impl VacuumProbabilities {
    /// Marginalizes every mode other than `(mode_c, mode_d)`.
    pub fn of(state: &TruncatedOpticalState, mode_c: usize, mode_d: usize) -> Result<Self> {
        let n = state.n_max() + 1;
        let modes = state.modes();
        for m in [mode_c, mode_d] {
            if m >= modes {
                return Err(crate::Error::ModeOutOfRange { index: m, modes });
            }
        }
        let stride = |m: usize| n.pow((modes - 1 - m) as u32);
        let (sc, sd) = (stride(mode_c), stride(mode_d));
        let mut out = Self::default();
        for (i, a) in state.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let c_empty = (i / sc) % n == 0;
            let d_empty = (i / sd) % n == 0;
            out.weight += p;
            if c_empty {
                out.v1 += p;
            }
            if d_empty {
                out.v2 += p;
            }
            if c_empty && d_empty {
                out.v12 += p;
            }
        }
        Ok(out)
    }
}

impl std::ops::AddAssign for VacuumProbabilities {
    fn add_assign(&mut self, rhs: Self) {
        self.v1 += rhs.v1;
        self.v2 += rhs.v2;
        self.v12 += rhs.v12;
        self.weight += rhs.weight;
    }
}

/// Probabilities of the four click patterns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct HeraldProbabilities {
    pub d1_only: f64,
    pub d2_only: f64,
    pub none: f64,
    pub both: f64,
}

impl HeraldProbabilities {
    /// Applies unit-efficiency threshold detectors, each with dark-count
    /// probability `p_d`.
    pub fn from_vacuum(v: VacuumProbabilities, p_d: f64) -> Self {
        let quiet = 1.0 - p_d;
        let none = quiet * quiet * v.v12;
        let d1_only = quiet * v.v2 - none;
        let d2_only = quiet * v.v1 - none;
        Self {
            d1_only,
            d2_only,
            none,
            both: v.weight - d1_only - d2_only - none,
        }
    }

    pub fn success(&self) -> f64 {
        self.d1_only + self.d2_only
    }

    pub fn total(&self) -> f64 {
        self.d1_only + self.d2_only + self.none + self.both
    }

    pub fn outcomes(&self) -> [HeraldOutcome; 4] {
        [
            HeraldOutcome {
                which: Herald::D1Only,
                probability: self.d1_only,
            },
            HeraldOutcome {
                which: Herald::D2Only,
                probability: self.d2_only,
            },
            HeraldOutcome {
                which: Herald::None,
                probability: self.none,
            },
            HeraldOutcome {
                which: Herald::Both,
                probability: self.both,
            },
        ]
    }
}

/// Click statistics of D1 on `detector_modes.0` and D2 on `detector_modes.1`.
pub fn threshold_detect(
    state: &TruncatedOpticalState,
    detector_modes: (usize, usize),
    p_d: f64,
) -> Result<HeraldProbabilities> {
    let v = VacuumProbabilities::of(state, detector_modes.0, detector_modes.1)?;
    Ok(HeraldProbabilities::from_vacuum(v, p_d))
}
