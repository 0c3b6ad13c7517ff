use super::{sigma_analytic, GaussianTimeLaw, SpectralSystem};
use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix, PureState};
use crate::C64;

const WEIGHT_TOL: f64 = 1e-12;

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() || weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::Parameter("weights must be non-negative and finite".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Parameter(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Classical mixture of pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState {
    weights: Vec<f64>,
    members: Vec<PureState>,
}

impl EnsembleState {
    pub fn new(weights: Vec<f64>, members: Vec<PureState>) -> Result<Self> {
        check_weights(&weights)?;
        if weights.len() != members.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} members",
                weights.len(),
                members.len()
            )));
        }
        let dim = members[0].dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(Error::Dimension("members have different dimensions".into()));
        }
        Ok(Self { weights, members })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[PureState] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, psi) in self.weights.iter().zip(&self.members) {
            m.add_scaled(psi.projector().matrix(), C64::new(*w, 0.0));
        }
        DensityMatrix::from_trusted(m)
    }
}

/// Mixture of snapshots `|Ψ(t0 + k dt)⟩` with the given weights.
///
/// This is the coarse-grained reading of a slow clock; `dt` is not required
/// to respect the energy-time bound.
pub fn coarse_time_mixture(
    sys: &SpectralSystem,
    t0: f64,
    dt: f64,
    weights: &[f64],
) -> Result<EnsembleState> {
    check_weights(weights)?;
    if !t0.is_finite() || !dt.is_finite() {
        return Err(Error::Parameter("t0 and dt must be finite".into()));
    }
    let members = (0..weights.len())
        .map(|k| sys.evolved(t0 + k as f64 * dt))
        .collect();
    EnsembleState::new(weights.to_vec(), members)
}

/// Time-averages every member under the Hamiltonian with the given levels and
/// mixes the results with the ensemble weights.
pub fn apply_dynamical_map(
    ens: &EnsembleState,
    levels: &[f64],
    law: &GaussianTimeLaw,
) -> Result<DensityMatrix> {
    if levels.len() != ens.dim() {
        return Err(Error::Model(format!(
            "{} levels for ensemble of dimension {}",
            levels.len(),
            ens.dim()
        )));
    }
    let dim = ens.dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (w, psi) in ens.weights().iter().zip(ens.members()) {
        let sys = SpectralSystem::from_state(levels.to_vec(), psi)?;
        m.add_scaled(sigma_analytic(&sys, law).matrix(), C64::new(*w, 0.0));
    }
    Ok(DensityMatrix::from_trusted(m))
}
