use super::law::window_mass;
use super::{GaussianTimeLaw, SpectralSystem};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;
use std::f64::consts::PI;

/// Which term of the energy-time bound is binding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// `π / (2 ΔH)`.
    Spread,
    /// `π / (2 (⟨H⟩ - E_g))`.
    Gap,
}

/// Minimum time for the state to become orthogonal to itself:
/// `τ_min = max(π / 2ΔH, π / 2(⟨H⟩ - E_g))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBound {
    pub delta_h: f64,
    pub gap: f64,
    pub tau_min: f64,
    pub binding: BoundBranch,
}

impl TimeBound {
    /// Builds the bound from an energy spread and a ground-state gap.
    pub fn from_moments(delta_h: f64, gap: f64) -> Result<Self> {
        if !(delta_h >= 0.0 && gap >= 0.0) || !delta_h.is_finite() || !gap.is_finite() {
            return Err(Error::Parameter(format!(
                "spread {delta_h} and gap {gap} must be finite and non-negative"
            )));
        }
        if delta_h == 0.0 || gap == 0.0 {
            return Err(Error::DegenerateClock);
        }
        let spread = PI / (2.0 * delta_h);
        let gap_term = PI / (2.0 * gap);
        let (tau_min, binding) = if spread >= gap_term {
            (spread, BoundBranch::Spread)
        } else {
            (gap_term, BoundBranch::Gap)
        };
        Ok(Self {
            delta_h,
            gap,
            tau_min,
            binding,
        })
    }

    /// `π / 2ΔH`.
    pub fn spread_term(&self) -> f64 {
        PI / (2.0 * self.delta_h)
    }

    /// `π / 2(⟨H⟩ - E_g)`.
    pub fn gap_term(&self) -> f64 {
        PI / (2.0 * self.gap)
    }
}

/// Relative spread below which a state counts as stationary.
const STATIONARY_TOL: f64 = 1e-12;

/// Energy-time bound for populations `weights` on `levels`, with `E_g` the
/// lowest level of the spectrum.
pub fn time_bound(levels: &[f64], weights: &[f64]) -> Result<TimeBound> {
    if levels.len() != weights.len() || levels.is_empty() {
        return Err(Error::Dimension(format!(
            "{} levels for {} weights",
            levels.len(),
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| !(w >= 0.0)) || (total - 1.0).abs() > 1e-10 {
        return Err(Error::Normalization(format!("weights sum to {total}")));
    }
    let mean: f64 = levels.iter().zip(weights).map(|(h, w)| h * w).sum();
    let var: f64 = levels.iter().zip(weights).map(|(h, w)| (h - mean).powi(2) * w).sum();
    let delta_h = var.sqrt();
    let scale = levels.iter().fold(1.0f64, |m, h| m.max(h.abs()));
    if delta_h <= STATIONARY_TOL * scale {
        return Err(Error::DegenerateClock);
    }
    let ground = levels.iter().copied().fold(f64::INFINITY, f64::min);
    TimeBound::from_moments(delta_h, mean - ground)
}

impl SpectralSystem {
    pub fn time_bound(&self) -> Result<TimeBound> {
        time_bound(self.levels(), &self.weights())
    }
}

/// Published readout-law parameters of the worked scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TwoQubit,
    FourQubit,
    SpinBath,
    Position,
    Oscillator,
}

impl Preset {
    /// `(Δt, λ)`.
    pub fn pair(self) -> (f64, f64) {
        match self {
            Preset::TwoQubit => (3.0, 1.0),
            Preset::FourQubit => (1.0, 2.0),
            Preset::SpinBath => (1.56, 1.0),
            Preset::Position | Preset::Oscillator => (0.78, 3.0),
        }
    }
}

/// How `(Δt, λ)` are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterPolicy {
    /// Use a scenario's published pair as is.
    Published(Preset),
    /// Half-window just inside `τ_min / 2`, width chosen so the window holds
    /// at least `min_window_mass` of the law.
    Automatic {
        safety: f64,
        min_window_mass: f64,
        lambda_max: f64,
    },
}

impl ParameterPolicy {
    pub fn automatic() -> Self {
        ParameterPolicy::Automatic {
            safety: 0.98,
            min_window_mass: 0.95,
            lambda_max: 1e8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawParameters {
    pub dt: f64,
    pub lambda: f64,
}

impl LawParameters {
    pub fn at(&self, t0: f64) -> Result<GaussianTimeLaw> {
        GaussianTimeLaw::new(t0, self.lambda, self.dt)
    }
}

/// Chosen parameters and how they sit against the constraints
/// `τ_min > 2Δt` and `Δt ≥ λ^{-1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterChoice {
    pub params: LawParameters,
    pub window_mass: f64,
    pub within_time_bound: bool,
    pub window_covers_width: bool,
}

/// Picks `(Δt, λ)` for a system with the given bound.
///
/// Automatic selection always satisfies both constraints or fails with a
/// parameter error. Published pairs are returned unchanged, with the
/// constraint checks recorded for the caller to report.
pub fn select_parameters(bound: &TimeBound, policy: &ParameterPolicy) -> Result<ParameterChoice> {
    let params = match *policy {
        ParameterPolicy::Published(preset) => {
            let (dt, lambda) = preset.pair();
            LawParameters { dt, lambda }
        }
        ParameterPolicy::Automatic {
            safety,
            min_window_mass,
            lambda_max,
        } => {
            if !(safety > 0.0 && safety < 1.0) {
                return Err(Error::Parameter(format!("safety factor {safety} not in (0, 1)")));
            }
            if !(min_window_mass > 0.0 && min_window_mass < 1.0) {
                return Err(Error::Parameter(format!(
                    "window mass {min_window_mass} not in (0, 1)"
                )));
            }
            let dt = safety * bound.tau_min / 2.0;
            let k = erf_inv(min_window_mass).max(1.0);
            let lambda = (k / dt).powi(2);
            if !(lambda <= lambda_max) {
                return Err(Error::Parameter(format!(
                    "required lambda {lambda:.4e} exceeds the cap {lambda_max:.4e}"
                )));
            }
            LawParameters { dt, lambda }
        }
    };
    Ok(ParameterChoice {
        params,
        window_mass: window_mass(params.lambda, params.dt),
        within_time_bound: bound.tau_min > 2.0 * params.dt,
        window_covers_width: params.dt * params.lambda.sqrt() >= 1.0 - 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn two_level(e: f64) -> SpectralSystem {
        let s = 0.5f64.sqrt();
        SpectralSystem::new(vec![0.0, e], vec![C64::new(s, 0.0); 2]).unwrap()
    }

    #[test]
    fn equal_two_level_bound() {
        let b = two_level(2.0).time_bound().unwrap();
        assert!((b.tau_min - PI / 2.0).abs() < 1e-15);
        assert!((b.spread_term() - b.gap_term()).abs() < 1e-15);
    }

    #[test]
    fn single_level_is_degenerate() {
        let sys = SpectralSystem::new(vec![1.0, 2.0], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
            .unwrap();
        assert_eq!(sys.time_bound(), Err(Error::DegenerateClock));
    }

    #[test]
    fn automatic_policy_meets_constraints() {
        let b = two_level(1.0).time_bound().unwrap();
        let choice = select_parameters(&b, &ParameterPolicy::automatic()).unwrap();
        assert!(choice.within_time_bound && choice.window_covers_width);
        assert!(choice.window_mass >= 0.95 - 1e-12);
    }

    #[test]
    fn automatic_policy_respects_cap() {
        let b = two_level(1e6).time_bound().unwrap();
        let err = select_parameters(&b, &ParameterPolicy::automatic()).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn published_pair_is_returned_unchanged() {
        let b = TimeBound::from_moments(0.25, 0.25).unwrap();
        let choice = select_parameters(&b, &ParameterPolicy::Published(Preset::TwoQubit)).unwrap();
        assert_eq!(choice.params, LawParameters { dt: 3.0, lambda: 1.0 });
        assert!(choice.within_time_bound);
    }
}
