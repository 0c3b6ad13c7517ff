use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use std::f64::consts::PI;

/// Gaussian law `ρ(t) = sqrt(λ/π) exp(-λ (t - t0)²)` for the readout instant,
/// with a nominal window `[t0 - Δt, t0 + Δt]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTimeLaw {
    t0: f64,
    lambda: f64,
    dt: f64,
}

impl GaussianTimeLaw {
    pub fn new(t0: f64, lambda: f64, dt: f64) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::Parameter(format!("t0 must be finite, got {t0}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { t0, lambda, dt })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Same width and window, centred elsewhere.
    pub fn with_t0(&self, t0: f64) -> Result<Self> {
        Self::new(t0, self.lambda, self.dt)
    }

    pub fn density(&self, t: f64) -> f64 {
        let x = t - self.t0;
        (self.lambda / PI).sqrt() * (-self.lambda * x * x).exp()
    }

    /// Probability that the readout falls inside the window.
    pub fn window_mass(&self) -> f64 {
        window_mass(self.lambda, self.dt)
    }

    /// Whether `Δt ≥ λ^{-1/2}`, i.e. the window covers at least one width.
    pub fn window_covers_width(&self) -> bool {
        self.dt * self.lambda.sqrt() >= 1.0 - 1e-12
    }
}

/// `ρ(t)` of the law.
pub fn gaussian_density(law: &GaussianTimeLaw, t: f64) -> f64 {
    law.density(t)
}

/// `erf(sqrt(λ) Δt)`.
pub fn window_mass(lambda: f64, dt: f64) -> f64 {
    erf(lambda.sqrt() * dt)
}

/// `exp(-Δh² / 4λ)`: the magnitude by which time averaging damps a coherence
/// between levels separated by `Δh`.
pub fn coherence_factor(delta_h: f64, lambda: f64) -> f64 {
    (-delta_h * delta_h / (4.0 * lambda)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussianTimeLaw::new(0.0, 0.0, 1.0).is_err());
        assert!(GaussianTimeLaw::new(0.0, 1.0, -1.0).is_err());
        assert!(GaussianTimeLaw::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn window_mass_values() {
        let law = GaussianTimeLaw::new(0.0, 1.0, 3.0).unwrap();
        assert!((law.window_mass() - 0.999_977_909_503_001_4).abs() < 1e-12);
        assert!((window_mass(3.0, 0.78) - erf(3f64.sqrt() * 0.78)).abs() < 1e-15);
    }

    #[test]
    fn density_peaks_at_centre() {
        let law = GaussianTimeLaw::new(2.0, 4.0, 1.0).unwrap();
        assert!((law.density(2.0) - (4.0 / PI).sqrt()).abs() < 1e-15);
        assert!(law.density(2.5) < law.density(2.0));
    }

    #[test]
    fn coherence_factor_for_quarter_splitting() {
        assert!((coherence_factor(0.5, 1.0) - (-1.0f64 / 16.0).exp()).abs() < 1e-16);
    }
}
