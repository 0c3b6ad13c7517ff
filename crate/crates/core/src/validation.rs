//! Randomised cross-check of the closed-form time average against direct
//! quadrature, with the purity and energy identities.

use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::localtime::{
    energy_expectation, purity_with, sigma_analytic_with, sigma_quadrature, ExponentForm,
    GaussianTimeLaw, QuadratureConfig, SpectralSystem,
};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest Frobenius distance between closed form and quadrature.
pub const SIGMA_TOL: f64 = 1e-6;
/// Largest deviation of the purity formula from `tr σ²`.
pub const PURITY_TOL: f64 = 1e-12;
/// Largest deviation of `tr(σ H)` from `⟨H⟩`.
pub const ENERGY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub dim_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub nodes: usize,
    /// Exponent used by the closed forms under test.
    pub form: ExponentForm,
    pub exec: Exec,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            dim_max: 16,
            trials: 100,
            seed: 0,
            nodes: 1024,
            form: ExponentForm::Squared,
            exec: Exec::Parallel,
        }
    }
}

/// Outcome of one randomised system. Replay it with the same seed and
/// `trial` index: trial `k` draws from stream `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub lambda: f64,
    pub dt: f64,
    pub t0: f64,
    pub sigma_error: f64,
    pub purity_error: f64,
    pub energy_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    pub outcomes: Vec<TrialOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

/// Draws the system of trial `trial`.
pub fn random_system(seed: u64, trial: usize, dim_max: usize) -> Result<(SpectralSystem, GaussianTimeLaw)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let dim = rng.random_range(1..=dim_max);
    let levels: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..=2.0)).collect();
    let raw: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let amplitudes = if norm > 0.0 {
        raw.into_iter().map(|c| c / norm).collect()
    } else {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(1.0, 0.0);
        v
    };
    let lambda = rng.random_range(0.5..=3.0);
    let dt = rng.random_range(1.0..=3.0);
    let t0 = rng.random_range(-10.0..=10.0);
    Ok((SpectralSystem::new(levels, amplitudes)?, GaussianTimeLaw::new(t0, lambda, dt)?))
}

fn run_trial(cfg: &ValidationConfig, trial: usize) -> Result<TrialOutcome> {
    let (sys, law) = random_system(cfg.seed, trial, cfg.dim_max)?;
    let quad_cfg = QuadratureConfig {
        nodes: cfg.nodes,
        tail_correction: true,
        exec: Exec::Sequential,
        ..Default::default()
    };
    let oracle = sigma_quadrature(&sys, &law, &quad_cfg)?;
    let closed = sigma_analytic_with(&sys, &law, cfg.form);
    let sigma_error = (closed.matrix() - oracle.matrix()).frobenius_norm();
    let purity = purity_with(&sys, law.lambda(), cfg.form);
    let purity_error = (purity - closed.purity()).abs().max((purity - oracle.purity()).abs());
    let energy_error = (energy_expectation(&closed, sys.levels()) - sys.mean_energy()).abs();
    Ok(TrialOutcome {
        trial,
        seed: cfg.seed,
        dim: sys.dim(),
        lambda: law.lambda(),
        dt: law.dt(),
        t0: law.t0(),
        passed: sigma_error < SIGMA_TOL && purity_error < PURITY_TOL && energy_error < ENERGY_TOL,
        sigma_error,
        purity_error,
        energy_error,
    })
}

/// Runs `cfg.trials` independent random systems.
pub fn validate(cfg: &ValidationConfig) -> Result<ValidationReport> {
    if cfg.trials == 0 || cfg.dim_max == 0 {
        return Err(Error::Parameter("need at least one trial of dimension at least 1".into()));
    }
    let outcomes = map_range(cfg.exec, cfg.trials, |k| run_trial(cfg, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport {
        config: *cfg,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_systems_pass() {
        let report = validate(&ValidationConfig {
            trials: 40,
            ..Default::default()
        })
        .unwrap();
        let worst = report.outcomes.iter().map(|o| o.sigma_error).fold(0.0, f64::max);
        assert!(report.passed(), "worst sigma error {worst}");
        assert!(report.outcomes.iter().any(|o| o.dim == 1));
    }

    #[test]
    fn unsquared_exponent_is_caught() {
        let report = validate(&ValidationConfig {
            trials: 10,
            form: ExponentForm::LiteralUnsquared,
            ..Default::default()
        })
        .unwrap();
        assert!(!report.passed());
        assert!(report.failures().all(|o| o.purity_error > PURITY_TOL));
    }

    #[test]
    fn trials_replay_exactly() {
        let cfg = ValidationConfig {
            trials: 6,
            seed: 11,
            ..Default::default()
        };
        let a = validate(&cfg).unwrap();
        let b = validate(&ValidationConfig {
            exec: Exec::Sequential,
            ..cfg
        })
        .unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        let (sys, _) = random_system(11, 3, 16).unwrap();
        assert_eq!(sys.dim(), a.outcomes[3].dim);
    }
}
