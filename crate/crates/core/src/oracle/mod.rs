//! First-principles verifier for the closed-form statistics.
//!
//! Each spin outcome leaves a cat-like optical pulse in each arm. The pulse
//! crosses a loss beamsplitter coupled to a vacuum environment mode, the
//! environment is traced out (the arm becomes mixed), Bob's arm picks up the
//! misalignment phase, both arms meet on the symmetric splitter at the
//! central station, and threshold detectors with dark counts announce a
//! herald. Nothing here calls into [`crate::rates`].

pub mod cat;
pub mod detect;
pub mod fock;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DetectorStats;

use cat::{CatStateDecomposition, Role, SpinOutcome};
use detect::{HeraldProbabilities, VacuumProbabilities};
use fock::{certify_cutoff, BeamSplitter, OpticalEnsemble, TruncatedOpticalState};

pub use cat::{EcsKind, MeasurementSetting};
pub use detect::{threshold_detect, Herald, HeraldOutcome};
pub use fock::{beamsplitter_apply, coherent_fock, misalignment_phase, misalignment_rotate};

/// Per-mode Fock cutoff used unless overridden.
pub const DEFAULT_N_MAX: usize = 30;

/// Eigenvalues of an arm's reduced state below this are dropped.
const EIGEN_CUTOFF: f64 = 1e-20;

/// Largest tolerated norm drift after a unitary step.
const NORM_TOLERANCE: f64 = 1e-10;

/// The five Alice/Bob pairs the protocol uses: the key pair then the four
/// CHSH pairs.
pub const SETTING_PAIRS: [(Role, Role); 5] = [
    (Role::A0, Role::B1),
    (Role::A1, Role::B1),
    (Role::A1, Role::B2),
    (Role::A2, Role::B1),
    (Role::A2, Role::B2),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub n_max: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_max: DEFAULT_N_MAX }
    }
}

/// Heralded success and (flip-corrected) correlator for one setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairStatistics {
    pub alice: Role,
    pub bob: Role,
    /// `P(D1-only) + P(D2-only)` summed over spin outcomes.
    pub success: f64,
    /// `P(a = b') − P(a ≠ b')` conditioned on success, `b'` after the flip rule.
    pub correlator: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub stats: DetectorStats,
    pub pairs: Vec<PairStatistics>,
    /// Poisson tail certificate of the largest intensity in play.
    pub truncation_tail: f64,
    /// Largest norm drift seen after any unitary step.
    pub max_norm_drift: f64,
    /// Largest deviation of the four herald probabilities from the branch weight.
    pub max_herald_sum_error: f64,
}

/// Heralded statistics computed in truncated Fock space at the default cutoff.
pub fn oracle_stats(mu: f64, eta: f64, p_d: f64, e_d: f64) -> Result<DetectorStats> {
    Ok(oracle_report(&OracleConfig::default(), mu, eta, p_d, e_d)?.stats)
}

fn check_inputs(mu: f64, eta: f64, p_d: f64, e_d: f64) -> Result<()> {
    let bad = |what: &str, v: f64| Err(Error::InvalidParams(format!("oracle: {what} out of range: {v}")));
    if !(mu > 0.0 && mu.is_finite()) {
        return bad("mu", mu);
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return bad("eta", eta);
    }
    if !(0.0..1.0).contains(&p_d) {
        return bad("p_d", p_d);
    }
    if !(0.0..=0.5).contains(&e_d) {
        return bad("e_d", e_d);
    }
    Ok(())
}

struct Workspace {
    n_max: usize,
    loss: BeamSplitter,
    station: BeamSplitter,
    max_norm_drift: f64,
}

impl Workspace {
    fn track(&mut self, before: f64, after: f64) -> Result<()> {
        let drift = (before - after).abs();
        self.max_norm_drift = self.max_norm_drift.max(drift);
        if drift > NORM_TOLERANCE {
            return Err(Error::InvalidParams(format!(
                "norm drift {drift:e} exceeds {NORM_TOLERANCE:e}; raise n_max (currently {})",
                self.n_max
            )));
        }
        Ok(())
    }

    /// Mixed state reaching the station from one arm, weighted by the
    /// probability of the spin outcome that produced it.
    fn arm_ensemble(&mut self, mu: f64, role: Role, outcome: SpinOutcome, phase: f64) -> Result<OpticalEnsemble> {
        let decomposition = CatStateDecomposition::new(mu, role.angle());
        let pulse = decomposition.optical_state(outcome, self.n_max)?;
        let with_env = pulse.tensor(&TruncatedOpticalState::vacuum(1, self.n_max));
        let before = with_env.norm_sqr();
        let lossy = self.loss.apply(&with_env, 0, 1)?;
        self.track(before, lossy.norm_sqr())?;
        let rho = lossy.reduced_density(0)? * num_complex::Complex64::from(decomposition.prior(outcome));
        let mut ensemble = OpticalEnsemble::from_density(rho, EIGEN_CUTOFF)?;
        if phase != 0.0 {
            ensemble.components = ensemble
                .components
                .iter()
                .map(|c| fock::misalignment_rotate(c, 0, phase))
                .collect::<Result<_>>()?;
        }
        Ok(ensemble)
    }

    fn vacuum_statistics(&mut self, alice: &OpticalEnsemble, bob: &OpticalEnsemble) -> Result<VacuumProbabilities> {
        let mut acc = VacuumProbabilities::default();
        for a in &alice.components {
            for b in &bob.components {
                let joint = a.tensor(b);
                let before = joint.norm_sqr();
                let out = self.station.apply(&joint, 0, 1)?;
                self.track(before, out.norm_sqr())?;
                acc += VacuumProbabilities::of(&out, 0, 1)?;
            }
        }
        Ok(acc)
    }
}

/// Full oracle evaluation with diagnostics.
pub fn oracle_report(config: &OracleConfig, mu: f64, eta: f64, p_d: f64, e_d: f64) -> Result<OracleReport> {
    check_inputs(mu, eta, p_d, e_d)?;
    let n_max = config.n_max;
    // Largest intensity anywhere: both arms merged into one output mode.
    let truncation_tail = certify_cutoff(mu, n_max)?.max(certify_cutoff(2.0 * mu, n_max)?);

    let mut ws = Workspace {
        n_max,
        loss: BeamSplitter::new(eta, 2 * n_max)?,
        station: BeamSplitter::new(0.5, 2 * n_max)?,
        max_norm_drift: 0.0,
    };
    let phase = fock::misalignment_phase(e_d);

    // Arm states depend only on (role, outcome); build each once.
    let mut arms: HashMap<(Role, SpinOutcome), OpticalEnsemble> = HashMap::new();
    for (alice_role, bob_role) in SETTING_PAIRS {
        for outcome in SpinOutcome::BOTH {
            for (role, arm_phase) in [(alice_role, 0.0), (bob_role, phase)] {
                if let Entry::Vacant(slot) = arms.entry((role, outcome)) {
                    slot.insert(ws.arm_ensemble(mu, role, outcome, arm_phase)?);
                }
            }
        }
    }

    let mut pairs = Vec::with_capacity(SETTING_PAIRS.len());
    let mut max_herald_sum_error: f64 = 0.0;
    for (alice_role, bob_role) in SETTING_PAIRS {
        let mut success = 0.0;
        let mut signed = 0.0;
        for a in SpinOutcome::BOTH {
            let alice = &arms[&(alice_role, a)];
            for b in SpinOutcome::BOTH {
                let bob = &arms[&(bob_role, b)];
                let vac = ws.vacuum_statistics(alice, bob)?;
                let heralds = HeraldProbabilities::from_vacuum(vac, p_d);
                max_herald_sum_error = max_herald_sum_error.max((heralds.total() - vac.weight).abs());

                let same = a.value() == b.value();
                // Bob flips his Z outcome on a D2 herald.
                let same_after_d2 = if bob_role.is_z() { !same } else { same };
                let sign = |agree: bool| if agree { 1.0 } else { -1.0 };
                success += heralds.success();
                signed += heralds.d1_only * sign(same) + heralds.d2_only * sign(same_after_d2);
            }
        }
        if !(success > 0.0) {
            return Err(Error::Domain {
                what: "oracle herald probability",
                value: success,
            });
        }
        pairs.push(PairStatistics {
            alice: alice_role,
            bob: bob_role,
            success,
            correlator: signed / success,
        });
    }

    let corr = |alice: Role, bob: Role| {
        pairs
            .iter()
            .find(|p| p.alice == alice && p.bob == bob)
            .map(|p| p.correlator)
            .expect("all setting pairs evaluated")
    };
    let key = pairs[0];
    let s = corr(Role::A1, Role::B1) - corr(Role::A1, Role::B2) + corr(Role::A2, Role::B1) + corr(Role::A2, Role::B2);
    let stats = DetectorStats::new(key.success, s, (1.0 - key.correlator) / 2.0)?;

    Ok(OracleReport {
        stats,
        pairs,
        truncation_tail,
        max_norm_drift: ws.max_norm_drift,
        max_herald_sum_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TSIRELSON;

    #[test]
    fn ideal_point_matches_known_values() {
        let st = oracle_stats(0.25, 1.0, 0.0, 0.0).unwrap();
        assert!((st.q_zz - 0.393_469_340_287_366_6).abs() < 1e-10);
        assert!((st.s - 2.271_977_447_333_802).abs() < 1e-10);
        assert!(st.e_zz.abs() < 1e-12);
    }

    #[test]
    fn vacuum_limit_approaches_tsirelson() {
        let mut last = 0.0;
        for &mu in &[0.1, 0.01, 0.001] {
            let s = oracle_stats(mu, 0.3, 0.0, 0.0).unwrap().s;
            assert!(s < TSIRELSON + 1e-12 && s > last);
            last = s;
        }
        assert!(TSIRELSON - last < 1e-2);
    }

    #[test]
    fn diagnostics_are_tight() {
        let rep = oracle_report(&OracleConfig::default(), 0.5, 0.2, 1e-5, 0.07).unwrap();
        assert!(rep.max_norm_drift < 1e-12);
        assert!(rep.max_herald_sum_error < 1e-12);
        assert!(rep.truncation_tail < 1e-12);
        assert_eq!(rep.pairs.len(), 5);
    }

    #[test]
    fn rejects_bad_inputs_and_small_cutoff() {
        assert!(oracle_stats(0.0, 0.5, 0.0, 0.0).is_err());
        assert!(oracle_stats(0.1, 0.0, 0.0, 0.0).is_err());
        assert!(oracle_stats(0.1, 0.5, 0.0, 0.6).is_err());
        let tiny = OracleConfig { n_max: 3 };
        assert!(matches!(
            oracle_report(&tiny, 0.5, 0.5, 0.0, 0.0),
            Err(Error::Truncation { .. })
        ));
    }
}
