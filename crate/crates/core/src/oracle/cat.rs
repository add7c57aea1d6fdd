//! Atom–light cat states: spin-measurement settings, the optical states left
//! behind by each spin outcome, and the two-mode entangled coherent states.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;

use super::fock::{coherent_fock, TruncatedOpticalState};

/// Spin measurement roles. Alice uses A0–A2, Bob B1–B2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    A0,
    A1,
    A2,
    B1,
    B2,
}

impl Role {
    /// Angle of `χ_θ = cos θ σ_z + sin θ σ_x`.
    pub fn angle(self) -> f64 {
        match self {
            Role::A0 | Role::B1 => 0.0,
            Role::A1 => FRAC_PI_4,
            Role::A2 => -FRAC_PI_4,
            Role::B2 => FRAC_PI_2,
        }
    }

    /// Key-generating σ_z measurement.
    pub fn is_z(self) -> bool {
        self.angle() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementSetting {
    pub role: Role,
    pub theta: f64,
}

impl From<Role> for MeasurementSetting {
    fn from(role: Role) -> Self {
        Self {
            role,
            theta: role.angle(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SpinOutcome {
    Plus,
    Minus,
}

impl SpinOutcome {
    pub const BOTH: [SpinOutcome; 2] = [SpinOutcome::Plus, SpinOutcome::Minus];

    pub fn value(self) -> i32 {
        match self {
            SpinOutcome::Plus => 1,
            SpinOutcome::Minus => -1,
        }
    }
}

/// Normalizations and conditional amplitudes of `(|+z⟩|α⟩ + |−z⟩|−α⟩)/√2`
/// rewritten in the eigenbasis of `χ_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatStateDecomposition {
    pub mu: f64,
    pub theta: f64,
    /// `N± = 2(1 ± e^{−4μ})`
    pub n_plus: f64,
    pub n_minus: f64,
    /// `M± = √(1 ± sin θ e^{−2μ})`
    pub m_plus: f64,
    pub m_minus: f64,
}

impl CatStateDecomposition {
    pub fn new(mu: f64, theta: f64) -> Self {
        let overlap4 = (-4.0 * mu).exp();
        let overlap2 = (-2.0 * mu).exp();
        Self {
            mu,
            theta,
            n_plus: 2.0 * (1.0 + overlap4),
            n_minus: 2.0 * (1.0 - overlap4),
            m_plus: (1.0 + theta.sin() * overlap2).sqrt(),
            m_minus: (1.0 - theta.sin() * overlap2).sqrt(),
        }
    }

    /// Probability of the spin outcome, `(M^±)²/2`.
    pub fn prior(&self, outcome: SpinOutcome) -> f64 {
        match outcome {
            SpinOutcome::Plus => self.m_plus * self.m_plus / 2.0,
            SpinOutcome::Minus => self.m_minus * self.m_minus / 2.0,
        }
    }

    /// Coefficients `(amp_pos, amp_neg)` of `|α⟩` and `|−α⟩` in the
    /// normalized optical state left by `outcome`.
    pub fn amplitudes(&self, outcome: SpinOutcome) -> (f64, f64) {
        let (c, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        match outcome {
            SpinOutcome::Plus => (c / self.m_plus, s / self.m_plus),
            SpinOutcome::Minus => (s / self.m_minus, -c / self.m_minus),
        }
    }

    /// `|amp_pos|² + |amp_neg|² + 2 amp_pos amp_neg e^{−2μ}`; equals one.
    pub fn normalization(&self, outcome: SpinOutcome) -> f64 {
        let (p, n) = self.amplitudes(outcome);
        p * p + n * n + 2.0 * p * n * (-2.0 * self.mu).exp()
    }

    /// The conditional optical state in Fock space.
    pub fn optical_state(&self, outcome: SpinOutcome, n_max: usize) -> Result<TruncatedOpticalState> {
        let alpha = Complex64::new(self.mu.sqrt(), 0.0);
        let (p, n) = self.amplitudes(outcome);
        Ok(coherent_fock(alpha, n_max)?
            .scaled(p.into())
            .superpose(&coherent_fock(-alpha, n_max)?.scaled(n.into())))
    }
}

/// The four two-mode entangled coherent states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EcsKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl EcsKind {
    pub const ALL: [EcsKind; 4] = [EcsKind::PhiPlus, EcsKind::PhiMinus, EcsKind::PsiPlus, EcsKind::PsiMinus];

    fn relative_sign(self) -> f64 {
        match self {
            EcsKind::PhiPlus | EcsKind::PsiPlus => 1.0,
            EcsKind::PhiMinus | EcsKind::PsiMinus => -1.0,
        }
    }

    fn is_phi(self) -> bool {
        matches!(self, EcsKind::PhiPlus | EcsKind::PhiMinus)
    }

    /// Normalization `N±` of this state.
    pub fn normalization(self, mu: f64) -> f64 {
        2.0 * (1.0 + self.relative_sign() * (-4.0 * mu).exp())
    }

    /// Amplitude of this Bell state on spin pair `(a, b)`.
    pub fn bell_amplitude(self, a: SpinOutcome, b: SpinOutcome) -> f64 {
        use SpinOutcome::*;
        match (self.is_phi(), a, b) {
            (true, Plus, Plus) | (false, Plus, Minus) => FRAC_1_SQRT_2,
            (true, Minus, Minus) | (false, Minus, Plus) => self.relative_sign() * FRAC_1_SQRT_2,
            _ => 0.0,
        }
    }

    /// Mode that lights up after the symmetric splitter, and whether its
    /// photon number is odd. The other output stays in vacuum.
    pub fn output_support(self) -> (usize, bool) {
        let mode = if self.is_phi() { 0 } else { 1 };
        (mode, self.relative_sign() < 0.0)
    }
}

/// `(|α⟩|±α⟩ ± |−α⟩|∓α⟩)/√N±` in a two-mode truncated space.
pub fn entangled_coherent_state(kind: EcsKind, mu: f64, n_max: usize) -> Result<TruncatedOpticalState> {
    let alpha = Complex64::new(mu.sqrt(), 0.0);
    let second = if kind.is_phi() { alpha } else { -alpha };
    let first = coherent_fock(alpha, n_max)?.tensor(&coherent_fock(second, n_max)?);
    let other = coherent_fock(-alpha, n_max)?.tensor(&coherent_fock(-second, n_max)?);
    let norm = kind.normalization(mu).sqrt();
    Ok(first
        .superpose(&other.scaled(kind.relative_sign().into()))
        .scaled((1.0 / norm).into()))
}

/// Probability mass of a post-splitter state lying outside the support
/// predicted for `kind` (wrong parity in the lit mode, or photons in the dark one).
pub fn parity_residual(kind: EcsKind, output: &TruncatedOpticalState) -> f64 {
    let (lit, odd) = kind.output_support();
    let n = output.n_max() + 1;
    output
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let (n0, n1) = (i / n, i % n);
            let (n_lit, n_dark) = if lit == 0 { (n0, n1) } else { (n1, n0) };
            n_dark > 0 || (n_lit % 2 == 1) != odd
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Norm of the difference between `|Φ⁺⟩_{aa'}|Φ⁺⟩_{bb'}` and its expansion
/// over the four (Bell ⊗ ECS) terms with weights `√N±/(2√2)`.
pub fn bell_ecs_resolution_residual(mu: f64, n_max: usize) -> Result<f64> {
    let alpha = Complex64::new(mu.sqrt(), 0.0);
    let sign = |s: SpinOutcome| s.value() as f64;
    let ecs: Vec<(EcsKind, TruncatedOpticalState)> = EcsKind::ALL
        .iter()
        .map(|&k| entangled_coherent_state(k, mu, n_max).map(|s| (k, s)))
        .collect::<Result<_>>()?;
    let mut residual = 0.0;
    for a in SpinOutcome::BOTH {
        for b in SpinOutcome::BOTH {
            let product = coherent_fock(alpha * sign(a), n_max)?
                .tensor(&coherent_fock(alpha * sign(b), n_max)?)
                .scaled(0.5.into());
            let expansion = ecs.iter().fold(
                TruncatedOpticalState::vacuum(2, n_max).scaled(0.0.into()),
                |acc, (kind, state)| {
                    let w = kind.normalization(mu).sqrt() / (2.0 * 2f64.sqrt()) * kind.bell_amplitude(a, b);
                    acc.superpose(&state.clone().scaled(w.into()))
                },
            );
            residual += product.superpose(&expansion.scaled((-1.0).into())).norm_sqr();
        }
    }
    Ok(residual.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_table() {
        assert_eq!(Role::A0.angle(), 0.0);
        assert_eq!(Role::B1.angle(), 0.0);
        assert_eq!(Role::A1.angle(), FRAC_PI_4);
        assert_eq!(Role::A2.angle(), -FRAC_PI_4);
        assert_eq!(Role::B2.angle(), FRAC_PI_2);
        assert!(Role::A0.is_z() && Role::B1.is_z() && !Role::B2.is_z());
        assert_eq!(MeasurementSetting::from(Role::A1).theta, FRAC_PI_4);
    }

    #[test]
    fn normalization_invariants() {
        for &mu in &[1e-3, 0.1, 0.44, 1.0, 3.0] {
            for role in [Role::A0, Role::A1, Role::A2, Role::B2] {
                let d = CatStateDecomposition::new(mu, role.angle());
                assert!(d.n_minus <= 2.0 && 2.0 <= d.n_plus && d.n_plus <= 4.0);
                assert!((d.n_minus - (2.0 - 2.0 * (-4.0 * mu).exp())).abs() < 1e-15);
                for o in SpinOutcome::BOTH {
                    assert!((d.normalization(o) - 1.0).abs() < 1e-12);
                }
                assert!((d.prior(SpinOutcome::Plus) + d.prior(SpinOutcome::Minus) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conditional_states_are_normalized_in_fock_space() {
        let d = CatStateDecomposition::new(0.3, FRAC_PI_4);
        for o in SpinOutcome::BOTH {
            let s = d.optical_state(o, 30).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ecs_states_are_normalized() {
        for kind in EcsKind::ALL {
            let s = entangled_coherent_state(kind, 0.5, 30).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn product_state_resolves_into_bell_ecs_terms() {
        for &mu in &[0.05, 0.25, 1.0] {
            assert!(bell_ecs_resolution_residual(mu, 30).unwrap() < 1e-12);
        }
    }
}
