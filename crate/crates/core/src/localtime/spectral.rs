use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, PureState, Tolerances};
use crate::C64;
use serde::{Deserialize, Serialize};

/// A state expanded in the eigenbasis of its Hamiltonian:
/// `|Ψ(t)⟩ = Σ_n c_n e^{-i t h_n} |n⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSystem {
    levels: Vec<f64>,
    amplitudes: Vec<C64>,
}

impl SpectralSystem {
    pub fn new(levels: Vec<f64>, amplitudes: Vec<C64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Dimension("system has no levels".into()));
        }
        if levels.len() != amplitudes.len() {
            return Err(Error::Dimension(format!(
                "{} levels but {} amplitudes",
                levels.len(),
                amplitudes.len()
            )));
        }
        if levels.iter().any(|h| !h.is_finite()) {
            return Err(Error::Parameter("levels must be finite".into()));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > Tolerances::default().state_norm {
            return Err(Error::Normalization(format!(
                "amplitudes have squared norm {norm}"
            )));
        }
        Ok(Self { levels, amplitudes })
    }

    pub fn from_state(levels: Vec<f64>, state: &PureState) -> Result<Self> {
        Self::new(levels, state.amplitudes().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `|c_n|²`.
    pub fn weights(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_energy(&self) -> f64 {
        self.levels
            .iter()
            .zip(&self.amplitudes)
            .map(|(h, c)| h * c.norm_sqr())
            .sum()
    }

    pub fn energy_std(&self) -> f64 {
        let mean = self.mean_energy();
        self.levels
            .iter()
            .zip(&self.amplitudes)
            .map(|(h, c)| (h - mean).powi(2) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest minus smallest level.
    pub fn bandwidth(&self) -> f64 {
        let (lo, hi) = self
            .levels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| {
                (lo.min(h), hi.max(h))
            });
        hi - lo
    }

    /// Amplitudes of `|Ψ(t)⟩`.
    pub fn evolved_amplitudes(&self, t: f64) -> Vec<C64> {
        self.levels
            .iter()
            .zip(&self.amplitudes)
            .map(|(&h, &c)| c * C64::from_polar(1.0, -t * h))
            .collect()
    }

    pub fn evolved(&self, t: f64) -> PureState {
        PureState::from_unit(self.evolved_amplitudes(t))
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_inputs() {
        let c = C64::new(1.0, 0.0);
        assert!(SpectralSystem::new(vec![0.0, 1.0], vec![c]).is_err());
        assert!(SpectralSystem::new(vec![0.0, 1.0], vec![c, c]).is_err());
        assert!(SpectralSystem::new(vec![f64::INFINITY], vec![c]).is_err());
    }

    #[test]
    fn moments_of_equal_superposition() {
        let s = 0.5f64.sqrt();
        let sys = SpectralSystem::new(vec![-1.0, 1.0], vec![C64::new(s, 0.0); 2]).unwrap();
        assert!(sys.mean_energy().abs() < 1e-15);
        assert!((sys.energy_std() - 1.0).abs() < 1e-15);
        assert_eq!(sys.bandwidth(), 2.0);
        let psi = sys.evolved(std::f64::consts::FRAC_PI_2);
        assert!((psi.amplitudes()[0] - C64::new(0.0, s)).norm() < 1e-15);
    }
}
