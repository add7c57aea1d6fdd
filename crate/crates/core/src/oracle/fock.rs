//! Multi-mode state vectors in a photon-number basis truncated at `n_max`
//! photons per mode.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest Poisson tail accepted when a coherent amplitude is expanded.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Pure state of `modes` optical modes, each truncated at `n_max` photons.
///
/// Amplitudes are stored row-major with mode 0 as the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOpticalState {
    n_max: usize,
    modes: usize,
    amplitudes: Vec<Complex64>,
}

impl TruncatedOpticalState {
    pub fn vacuum(modes: usize, n_max: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); (n_max + 1).pow(modes as u32)];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            n_max,
            modes,
            amplitudes,
        }
    }

    /// Single-mode state from Fock coefficients `c_0..=c_{n_max}`.
    pub fn single_mode(coefficients: Vec<Complex64>) -> Self {
        assert!(!coefficients.is_empty(), "at least the vacuum coefficient is required");
        Self {
            n_max: coefficients.len() - 1,
            modes: 1,
            amplitudes: coefficients,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    fn dim(&self) -> usize {
        self.n_max + 1
    }

    fn stride(&self, mode: usize) -> usize {
        self.dim().pow((self.modes - 1 - mode) as u32)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.modes,
            })
        }
    }

    /// Photon number of `mode` at flat index `idx`.
    fn digit(&self, idx: usize, mode: usize) -> usize {
        (idx / self.stride(mode)) % self.dim()
    }

    /// Amplitude of the basis state `|n_0, n_1, …⟩`.
    pub fn amplitude(&self, photons: &[usize]) -> Complex64 {
        assert_eq!(photons.len(), self.modes);
        let idx = photons.iter().fold(0, |acc, &n| acc * self.dim() + n);
        self.amplitudes[idx]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.amplitudes.len(), other.amplitudes.len());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
        self
    }

    /// `self + other`, both with the same shape.
    pub fn superpose(mut self, other: &Self) -> Self {
        assert_eq!(self.modes, other.modes);
        assert_eq!(self.n_max, other.n_max);
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += b;
        }
        self
    }

    /// Tensor product `self ⊗ other`; modes of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Self {
        assert_eq!(self.n_max, other.n_max, "tensor factors must share n_max");
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Self {
            n_max: self.n_max,
            modes: self.modes + other.modes,
            amplitudes,
        }
    }

    /// Probability mass of basis states where `mode` holds an odd/even count.
    pub fn parity_mass(&self, mode: usize, odd: bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (self.digit(*i, mode) % 2 == 1) == odd)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability mass with at least one photon in `mode`.
    pub fn occupied_mass(&self, mode: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.digit(*i, mode) > 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.digit(i, mode) as f64 * a.norm_sqr())
            .sum()
    }

    /// Reduced density matrix of `keep` with every other mode traced out.
    pub fn reduced_density(&self, keep: usize) -> Result<DMatrix<Complex64>> {
        self.check_mode(keep)?;
        let dim = self.dim();
        let stride = self.stride(keep);
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for base in (0..self.amplitudes.len()).filter(|&i| self.digit(i, keep) == 0) {
            for n in 0..dim {
                let an = self.amplitudes[base + n * stride];
                if an == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for m in 0..dim {
                    rho[(n, m)] += an * self.amplitudes[base + m * stride].conj();
                }
            }
        }
        Ok(rho)
    }
}

/// Probability that a Poisson variable of the given mean exceeds `n_max`.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // P(n_max + 1) built in log space, then the series summed forward.
    let k0 = (n_max + 1) as f64;
    let log_first = -mean + k0 * mean.ln() - ln_factorial(n_max + 1);
    let mut term = log_first.exp();
    let mut sum = 0.0;
    let mut k = k0;
    while term > sum * 1e-17 || k < mean {
        sum += term;
        k += 1.0;
        term *= mean / k;
        if k > k0 + 10_000.0 {
            break;
        }
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Fails when the Poisson tail of `mean` beyond `n_max` exceeds [`TAIL_TOLERANCE`].
pub fn certify_cutoff(mean: f64, n_max: usize) -> Result<f64> {
    let tail = poisson_tail(mean, n_max);
    if tail > TAIL_TOLERANCE {
        return Err(Error::Truncation { n_max, mean, tail });
    }
    Ok(tail)
}

/// Coherent state `|α⟩` with coefficients `e^{−|α|²/2} αⁿ/√n!`.
pub fn coherent_fock(alpha: Complex64, n_max: usize) -> Result<TruncatedOpticalState> {
    certify_cutoff(alpha.norm_sqr(), n_max)?;
    let mut coefficients = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    coefficients.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        coefficients.push(c);
    }
    Ok(TruncatedOpticalState::single_mode(coefficients))
}

/// Two-mode beamsplitter with real amplitude transmission `t = √T` and
/// reflection `r = √(1−T)`:
///
/// ```text
/// c = t·a + r·b
/// d = r·a − t·b
/// ```
///
/// At `T = ½` this is the symmetric splitter `c = (a+b)/√2`, `d = (a−b)/√2`.
/// With a vacuum in `b` it models a loss channel of transmittance `T`.
#[derive(Debug, Clone)]
pub struct BeamSplitter {
    transmittance: f64,
    /// `blocks[N][k * (N+1) + n]`: amplitude of output `|k, N−k⟩` for input `|n, N−n⟩`.
    blocks: Vec<Vec<f64>>,
}

impl BeamSplitter {
    /// Precomputes photon-number-conserving blocks up to `max_total` photons.
    pub fn new(transmittance: f64, max_total: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(crate::error::domain("beamsplitter transmittance", transmittance));
        }
        let t = transmittance.sqrt();
        let r = (1.0 - transmittance).sqrt();
        let sqrt: Vec<f64> = (0..=max_total + 1).map(|k| (k as f64).sqrt()).collect();

        // Column n of block N is |n, N−n⟩ written in output modes. It is
        // built from block N−1 as (√n a†|n−1, N−n⟩ + √(N−n) b†|n, N−n−1⟩)/N
        // with a† = t c† + r d† and b† = r c† − t d†. Using both routes at
        // once keeps the recursion stable at large N.
        let mut blocks: Vec<Vec<f64>> = vec![vec![1.0]];
        for total in 1..=max_total {
            let prev = &blocks[total - 1];
            let width = total + 1;
            let inv_total = 1.0 / total as f64;
            let mut block = vec![0.0; width * width];
            for n in 0..=total {
                let m = total - n;
                let mut raise = |src_col: usize, weight: f64, cw: f64, dw: f64| {
                    for k in 0..total {
                        let amp = prev[k * total + src_col] * weight;
                        if amp == 0.0 {
                            continue;
                        }
                        // c† raises k, d† raises N−1−k.
                        block[(k + 1) * width + n] += cw * sqrt[k + 1] * amp;
                        block[k * width + n] += dw * sqrt[total - k] * amp;
                    }
                };
                if n > 0 {
                    raise(n - 1, sqrt[n] * inv_total, t, r);
                }
                if m > 0 {
                    raise(n, sqrt[m] * inv_total, r, -t);
                }
            }
            blocks.push(block);
        }
        Ok(Self { transmittance, blocks })
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// Largest deviation of `UᵀU` from the identity over all blocks.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (total, block) in self.blocks.iter().enumerate() {
            let w = total + 1;
            for i in 0..w {
                for j in 0..w {
                    let dot: f64 = (0..w).map(|k| block[k * w + i] * block[k * w + j]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((dot - target).abs());
                }
            }
        }
        worst
    }

    /// Applies the splitter to modes `(mode_a, mode_b)` of `state`.
    ///
    /// Output components above `n_max` in either mode are discarded; the
    /// caller sees this as a norm deficit.
    pub fn apply(&self, state: &TruncatedOpticalState, mode_a: usize, mode_b: usize) -> Result<TruncatedOpticalState> {
        state.check_mode(mode_a)?;
        state.check_mode(mode_b)?;
        if mode_a == mode_b {
            return Err(Error::InvalidParams(format!(
                "beamsplitter needs two distinct modes, got {mode_a} twice"
            )));
        }
        let n_max = state.n_max;
        if self.blocks.len() < 2 * n_max + 1 {
            return Err(Error::InvalidParams(format!(
                "beamsplitter prepared for {} photons, state needs {}",
                self.blocks.len() - 1,
                2 * n_max
            )));
        }
        let sa = state.stride(mode_a);
        let sb = state.stride(mode_b);
        let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
        let bases = (0..state.amplitudes.len()).filter(|&i| state.digit(i, mode_a) == 0 && state.digit(i, mode_b) == 0);
        for base in bases {
            for total in 0..=2 * n_max {
                let lo = total.saturating_sub(n_max);
                let hi = total.min(n_max);
                let block = &self.blocks[total];
                let w = total + 1;
                for n in lo..=hi {
                    let amp = state.amplitudes[base + n * sa + (total - n) * sb];
                    if amp == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for k in lo..=hi {
                        let u = block[k * w + n];
                        if u != 0.0 {
                            out[base + k * sa + (total - k) * sb] += amp * u;
                        }
                    }
                }
            }
        }
        Ok(TruncatedOpticalState {
            n_max,
            modes: state.modes,
            amplitudes: out,
        })
    }
}

/// One-off beamsplitter application; see [`BeamSplitter`] for the convention.
pub fn beamsplitter_apply(
    state: &TruncatedOpticalState,
    mode_i: usize,
    mode_j: usize,
    transmittance: f64,
) -> Result<TruncatedOpticalState> {
    BeamSplitter::new(transmittance, 2 * state.n_max)?.apply(state, mode_i, mode_j)
}

/// Phase shift `e^{i n̂ δ₀}` on one mode.
pub fn misalignment_rotate(state: &TruncatedOpticalState, mode: usize, delta0: f64) -> Result<TruncatedOpticalState> {
    state.check_mode(mode)?;
    let phases: Vec<Complex64> = (0..=state.n_max)
        .map(|n| Complex64::from_polar(1.0, n as f64 * delta0))
        .collect();
    let mut out = state.clone();
    for (i, a) in out.amplitudes.iter_mut().enumerate() {
        *a *= phases[state.digit(i, mode)];
    }
    Ok(out)
}

/// Relative phase `δ₀ = arccos(1 − 2e_d)` producing misalignment error `e_d`.
pub fn misalignment_phase(e_d: f64) -> f64 {
    (1.0 - 2.0 * e_d).clamp(-1.0, 1.0).acos()
}

/// Fock levels whose population is below this are left out of the
/// spectral decomposition. Off-diagonal entries obey `|ρ_ij|² ≤ ρ_ii ρ_jj`,
/// so the omitted part is negligible, and without it the eigensolver
/// overflows on the extreme dynamic range of large cutoffs.
pub const SUPPORT_FLOOR: f64 = 1e-60;

/// Mixed single-mode state as a list of unnormalized pure components
/// `ρ = Σ_k |v_k⟩⟨v_k|`.
#[derive(Debug, Clone)]
pub struct OpticalEnsemble {
    pub components: Vec<TruncatedOpticalState>,
    /// Trace weight dropped with negligible eigenvalues or unpopulated levels.
    pub dropped_weight: f64,
}

impl OpticalEnsemble {
    /// Spectral decomposition of a Hermitian density matrix; eigenvalues
    /// below `cutoff` are dropped.
    pub fn from_density(rho: DMatrix<Complex64>, cutoff: f64) -> Result<Self> {
        let dim = rho.nrows();
        let support = (0..dim)
            .rev()
            .find(|&k| rho[(k, k)].re > SUPPORT_FLOOR)
            .map_or(0, |k| k + 1);
        let mut dropped_weight: f64 = (support..dim).map(|k| rho[(k, k)].re.abs()).sum();
        let eigen = SymmetricEigen::new(rho.view((0, 0), (support, support)).into_owned());
        if let Some(bad) = eigen.eigenvalues.iter().find(|v| !v.is_finite()) {
            return Err(crate::error::domain("density matrix eigenvalue", *bad));
        }
        let mut components = Vec::new();
        for (k, &lambda) in eigen.eigenvalues.iter().enumerate() {
            if lambda <= cutoff {
                dropped_weight += lambda.abs();
                continue;
            }
            let scale = lambda.sqrt();
            let mut coefficients: Vec<Complex64> = eigen.eigenvectors.column(k).iter().map(|c| c * scale).collect();
            coefficients.resize(dim, Complex64::new(0.0, 0.0));
            components.push(TruncatedOpticalState::single_mode(coefficients));
        }
        Ok(Self {
            components,
            dropped_weight,
        })
    }

    pub fn trace(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn coherent_state_identities() {
        let vac = coherent_fock(c(0.0), 30).unwrap();
        assert_eq!(vac.amplitudes()[0], c(1.0));
        assert!(vac.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));

        let mu: f64 = 0.3;
        let plus = coherent_fock(c(mu.sqrt()), 30).unwrap();
        let minus = coherent_fock(c(-mu.sqrt()), 30).unwrap();
        assert!((plus.inner(&minus).re - (-2.0 * mu).exp()).abs() < 1e-15);
        assert!((plus.amplitudes()[0].norm_sqr() - (-mu).exp()).abs() < 1e-15);
        assert!((plus.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cutoff_certificate() {
        assert!(coherent_fock(c(10.0), 30).is_err());
        assert!(poisson_tail(2.0, 30) < 1e-20);
        assert!(poisson_tail(1.0, 2) > 0.07 && poisson_tail(1.0, 2) < 0.09);
        assert_eq!(poisson_tail(0.0, 5), 0.0);
    }

    #[test]
    fn beamsplitter_blocks_are_orthogonal() {
        for &t in &[0.5, 0.08, 0.93, 1.0, 0.0] {
            let bs = BeamSplitter::new(t, 60).unwrap();
            assert!(
                bs.orthogonality_defect() < 1e-12,
                "T={t}: {}",
                bs.orthogonality_defect()
            );
        }
    }

    #[test]
    fn coherent_inputs_combine_on_symmetric_splitter() {
        let alpha = c(0.6);
        let input = coherent_fock(alpha, 30)
            .unwrap()
            .tensor(&coherent_fock(alpha, 30).unwrap());
        let out = beamsplitter_apply(&input, 0, 1, 0.5).unwrap();
        let expect = coherent_fock(alpha * 2f64.sqrt(), 30)
            .unwrap()
            .tensor(&TruncatedOpticalState::vacuum(1, 30));
        assert!((out.inner(&expect).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_photon_splits_evenly() {
        let mut coeffs = vec![c(0.0); 4];
        coeffs[1] = c(1.0);
        let one = TruncatedOpticalState::single_mode(coeffs);
        let input = one.tensor(&TruncatedOpticalState::vacuum(1, 3));
        let out = beamsplitter_apply(&input, 0, 1, 0.5).unwrap();
        assert!((out.amplitude(&[1, 0]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.amplitude(&[0, 1]).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn loss_scales_coherent_amplitude() {
        let alpha = c(0.7);
        let input = coherent_fock(alpha, 30)
            .unwrap()
            .tensor(&TruncatedOpticalState::vacuum(1, 30));
        let out = beamsplitter_apply(&input, 0, 1, 0.3).unwrap();
        assert!((out.mean_photon_number(0) - 0.3 * 0.49).abs() < 1e-12);
        assert!((out.mean_photon_number(1) - 0.7 * 0.49).abs() < 1e-12);
    }

    #[test]
    fn bad_modes_rejected() {
        let s = TruncatedOpticalState::vacuum(2, 4);
        assert!(matches!(
            beamsplitter_apply(&s, 0, 2, 0.5),
            Err(Error::ModeOutOfRange { index: 2, modes: 2 })
        ));
        assert!(misalignment_rotate(&s, 5, 0.1).is_err());
        assert!(beamsplitter_apply(&s, 1, 1, 0.5).is_err());
        assert!(beamsplitter_apply(&s, 0, 1, 1.5).is_err());
    }

    #[test]
    fn misalignment_matches_phase_drift_map() {
        let mu: f64 = 0.4;
        let e_d = 0.07;
        let delta = misalignment_phase(e_d);
        assert!(misalignment_rotate(&coherent_fock(c(mu.sqrt()), 30).unwrap(), 0, 0.0)
            .unwrap()
            .eq(&coherent_fock(c(mu.sqrt()), 30).unwrap()));
        for (sign, bright, dim) in [(1.0, 0, 1), (-1.0, 1, 0)] {
            let a = coherent_fock(c(mu.sqrt()), 30).unwrap();
            let b = coherent_fock(c(sign * mu.sqrt()), 30).unwrap();
            let rotated = misalignment_rotate(&a.tensor(&b), 1, delta).unwrap();
            let out = beamsplitter_apply(&rotated, 0, 1, 0.5).unwrap();
            assert!((out.mean_photon_number(bright) - 2.0 * mu * (1.0 - e_d)).abs() < 1e-12);
            assert!((out.mean_photon_number(dim) - 2.0 * mu * e_d).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_density_of_product_state() {
        let a = coherent_fock(c(0.5), 20).unwrap();
        let b = coherent_fock(c(-0.2), 20).unwrap();
        let rho = a.tensor(&b).reduced_density(0).unwrap();
        for n in 0..5 {
            for m in 0..5 {
                let want = a.amplitudes()[n] * a.amplitudes()[m].conj();
                assert!((rho[(n, m)] - want).norm() < 1e-15);
            }
        }
        let ens = OpticalEnsemble::from_density(rho, 1e-18).unwrap();
        assert_eq!(ens.components.len(), 1);
        assert!((ens.trace() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ensemble_of_weak_lossy_pulse_at_large_cutoff() {
        // A weak pulse at n_max = 60 has populations spanning hundreds of
        // decades, which the plain eigensolver does not survive.
        let n = 60;
        let pulse = coherent_fock(c(0.1), n)
            .unwrap()
            .tensor(&TruncatedOpticalState::vacuum(1, n));
        let out = BeamSplitter::new(0.05, 2 * n).unwrap().apply(&pulse, 0, 1).unwrap();
        let ens = OpticalEnsemble::from_density(out.reduced_density(0).unwrap(), 1e-20).unwrap();
        assert!((ens.trace() - 1.0).abs() < 1e-13);
        assert!(ens.dropped_weight < 1e-12);
        assert!(ens
            .components
            .iter()
            .all(|v| v.amplitudes().iter().all(|a| a.is_finite())));
    }
}
