use super::{GaussianTimeLaw, SpectralSystem};
use crate::exec::{map_range, pairwise_sum, Exec};
use crate::qcore::{ComplexMatrix, DensityMatrix};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Exponent of the level-difference damping.
///
/// `Squared` is the correct `exp(-Δh²/κλ)`. `LiteralUnsquared` replaces `Δh²`
/// by `|Δh|`; it exists only so the validation suite can show that it
/// detects that mistake.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentForm {
    #[default]
    Squared,
    LiteralUnsquared,
}

impl ExponentForm {
    fn damping(self, delta: f64, scale: f64) -> f64 {
        match self {
            ExponentForm::Squared => (-delta * delta / scale).exp(),
            ExponentForm::LiteralUnsquared => (-delta.abs() / scale).exp(),
        }
    }
}

/// Closed-form time average
/// `σ_nm = c_n c_m* e^{-i t0 (h_n - h_m)} e^{-(h_n - h_m)² / 4λ}`.
pub fn sigma_analytic(sys: &SpectralSystem, law: &GaussianTimeLaw) -> DensityMatrix {
    sigma_analytic_with(sys, law, ExponentForm::Squared)
}

pub fn sigma_analytic_with(
    sys: &SpectralSystem,
    law: &GaussianTimeLaw,
    form: ExponentForm,
) -> DensityMatrix {
    let h = sys.levels();
    let c = sys.amplitudes();
    let scale = 4.0 * law.lambda();
    let t0 = law.t0();
    let m = ComplexMatrix::from_fn(h.len(), h.len(), |n, k| {
        let delta = h[n] - h[k];
        c[n] * c[k].conj() * C64::from_polar(form.damping(delta, scale), -t0 * delta)
    });
    DensityMatrix::from_trusted(m)
}

/// `Σ_nm w_n w_m exp(-(h_n - h_m)² / scale)` with pairwise summation.
pub fn gaussian_pair_sum(
    levels: &[f64],
    weights: &[f64],
    scale: f64,
    form: ExponentForm,
    exec: Exec,
) -> f64 {
    let rows = map_range(exec, levels.len(), |n| {
        let terms: Vec<f64> = levels
            .iter()
            .zip(weights)
            .map(|(&h, &w)| w * form.damping(levels[n] - h, scale))
            .collect();
        weights[n] * pairwise_sum(&terms)
    });
    pairwise_sum(&rows)
}

/// `tr σ² = Σ_nm |c_n|²|c_m|² e^{-(h_n - h_m)² / 2λ}`; independent of `t0`
/// and of the window.
pub fn purity(sys: &SpectralSystem, lambda: f64) -> f64 {
    purity_with(sys, lambda, ExponentForm::Squared)
}

pub fn purity_with(sys: &SpectralSystem, lambda: f64, form: ExponentForm) -> f64 {
    gaussian_pair_sum(sys.levels(), &sys.weights(), 2.0 * lambda, form, Exec::Sequential)
}

/// `sqrt(⟨Ψ(t0)|σ|Ψ(t0)⟩) = sqrt(Σ_nm |c_n|²|c_m|² e^{-(h_n - h_m)² / 4λ})`.
pub fn fidelity_closed_form(levels: &[f64], weights: &[f64], lambda: f64, exec: Exec) -> f64 {
    gaussian_pair_sum(levels, weights, 4.0 * lambda, ExponentForm::Squared, exec)
        .max(0.0)
        .sqrt()
        .min(1.0)
}

/// `tr(σ H)` for a diagonal Hamiltonian with the given levels.
pub fn energy_expectation(sigma: &DensityMatrix, levels: &[f64]) -> f64 {
    let terms: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(n, h)| h * sigma.matrix()[(n, n)].re)
        .collect();
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity_pure, validate_density};

    fn qubit(e: f64) -> SpectralSystem {
        let s = 0.5f64.sqrt();
        SpectralSystem::new(vec![0.0, e], vec![C64::new(s, 0.0); 2]).unwrap()
    }

    #[test]
    fn two_level_coherence() {
        let law = GaussianTimeLaw::new(0.0, 1.0, 3.0).unwrap();
        let sigma = sigma_analytic(&qubit(1.0), &law);
        let expected = 0.5 * (-0.25f64).exp();
        assert!((sigma.matrix()[(0, 1)].norm() - expected).abs() < 1e-15);
        assert!(validate_density(sigma.matrix()).is_ok());
    }

    #[test]
    fn sharp_law_recovers_pure_state() {
        let sys = qubit(1.3);
        let law = GaussianTimeLaw::new(0.7, 1e14, 1.0).unwrap();
        let sigma = sigma_analytic(&sys, &law);
        let pure = sys.evolved(0.7).projector();
        assert!(sigma.matrix().max_abs_diff(pure.matrix()) < 1e-12);
    }

    #[test]
    fn purity_matches_matrix_purity() {
        let sys = SpectralSystem::new(
            vec![-1.0, 0.2, 0.9],
            vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)],
        )
        .unwrap();
        let law = GaussianTimeLaw::new(-3.0, 0.8, 2.0).unwrap();
        let sigma = sigma_analytic(&sys, &law);
        assert!((purity(&sys, 0.8) - sigma.purity()).abs() < 1e-14);
        let f = fidelity_pure(&sigma, &sys.evolved(-3.0)).unwrap();
        assert!((f - fidelity_closed_form(sys.levels(), &sys.weights(), 0.8, Exec::Sequential)).abs() < 1e-14);
    }

    #[test]
    fn unsquared_exponent_changes_the_state() {
        let sys = qubit(3.0);
        let law = GaussianTimeLaw::new(0.0, 1.0, 3.0).unwrap();
        let a = sigma_analytic(&sys, &law);
        let b = sigma_analytic_with(&sys, &law, ExponentForm::LiteralUnsquared);
        assert!(a.matrix().max_abs_diff(b.matrix()) > 0.1);
    }
}
