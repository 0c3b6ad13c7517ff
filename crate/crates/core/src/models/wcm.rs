//! Number-state readout of an oscillator by a second oscillator,
//! `H = ½ a†a (ε* b + ε b†)`, followed by a position readout of the
//! apparatus by its environment.
//!
//! Premeasurement drives `Σ c_n |n⟩` to `Σ c_n |n⟩|β_n⟩` with coherent
//! apparatus states `β_n = n ε t / 2`. The environment then reads the
//! apparatus quadrature `X = (b + b†)/√2`; its effect on the apparatus is the
//! branch trace of a Gaussian momentum packet, evaluated in closed form.

use super::grid::uniform_grid;
use super::position::gaussian_branch_trace;
use super::report::{Comparison, ScenarioReport};
use crate::error::{Error, Result};
use crate::exec::{map_range, pairwise_sum, Exec};
use crate::localtime::{LawParameters, Preset};
use crate::qcore::{validate_density, ComplexMatrix, DensityMatrix};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Largest Poisson tail tolerated past the Fock cutoff.
pub const TAIL_BOUND: f64 = 1e-8;
/// Apparatus quadrature points used for the environment readout.
const QUADRATURE_POINTS: usize = 128;
/// Quadrature range beyond the outermost coherent centre, in units of the
/// coherent spread.
const QUADRATURE_MARGIN: f64 = 10.0;

/// Inputs of the oscillator measurement model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockSpec {
    /// Apparatus Fock cutoff `D`.
    pub cutoff: usize,
    /// Object amplitudes `c_n`, `n = 0, 1, …`.
    pub amplitudes: Vec<C64>,
    /// Coupling `ε`.
    pub epsilon: C64,
    /// Environment couplings, recorded only.
    pub kappa: Vec<C64>,
    /// Premeasurement duration.
    pub t_pre: f64,
    /// Largest coherent overlap at which premeasurement counts as complete.
    pub completion_threshold: f64,
    pub law: LawParameters,
    /// Readout centre of the environment stage.
    pub t0: f64,
    /// Spread of the environment momentum packet.
    pub environment_spread: f64,
    pub exec: Exec,
}

impl Default for FockSpec {
    fn default() -> Self {
        let (dt, lambda) = Preset::Oscillator.pair();
        let s = C64::new(0.5f64.sqrt(), 0.0);
        Self {
            cutoff: 96,
            amplitudes: vec![s, s],
            epsilon: C64::new(1.0, 0.0),
            kappa: vec![C64::new(0.1, 0.0)],
            t_pre: 6.0,
            completion_threshold: 0.01,
            law: LawParameters { dt, lambda },
            t0: 20.0,
            environment_spread: 1.0,
            exec: Exec::Parallel,
        }
    }
}

impl FockSpec {
    fn validate(&self) -> Result<()> {
        if self.amplitudes.is_empty() || self.cutoff == 0 {
            return Err(Error::Parameter("need object amplitudes and a positive cutoff".into()));
        }
        let norm: f64 = self.amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(format!("object state has norm² {norm}")));
        }
        let finite = [self.epsilon.re, self.epsilon.im, self.t_pre, self.t0, self.environment_spread]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.environment_spread > 0.0) || !(self.completion_threshold > 0.0 && self.completion_threshold < 1.0) {
            return Err(Error::Parameter("coupling, times and spreads must be finite; threshold in (0, 1)".into()));
        }
        self.law.at(self.t0)?;
        Ok(())
    }

    /// Coherent amplitude `β_n = n ε t / 2`.
    pub fn displacement(&self, n: usize, t: f64) -> C64 {
        self.epsilon * (n as f64 * t / 2.0)
    }

    fn populated(&self) -> Vec<usize> {
        (0..self.amplitudes.len())
            .filter(|&n| self.amplitudes[n].norm_sqr() > 0.0)
            .collect()
    }
}

/// `Σ_{k ≥ D} |⟨k|β⟩|²`, the Poisson weight past the cutoff.
pub fn coherent_tail(beta: C64, cutoff: usize) -> f64 {
    let mean = beta.norm_sqr();
    if mean == 0.0 {
        return 0.0;
    }
    let log_mean = mean.ln();
    let mut log_p = -mean;
    let mut kept = 0.0;
    for k in 0..cutoff {
        if k > 0 {
            log_p += log_mean - (k as f64).ln();
        }
        kept += log_p.exp();
    }
    (1.0 - kept).max(0.0)
}

/// Coherent state truncated to `cutoff` Fock levels (not renormalised).
pub fn coherent_state(beta: C64, cutoff: usize) -> Vec<C64> {
    let r = beta.norm();
    (0..cutoff)
        .map(|k| {
            if r == 0.0 {
                return C64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0);
            }
            let log_mod = -0.5 * r * r + k as f64 * r.ln() - 0.5 * ln_factorial(k);
            C64::from_polar(log_mod.exp(), k as f64 * beta.arg())
        })
        .collect()
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// `|⟨β_m|β_n⟩| = exp(-|β_m - β_n|² / 2)`.
pub fn coherent_overlap(a: C64, b: C64) -> f64 {
    (-(a - b).norm_sqr() / 2.0).exp()
}

/// Earliest premeasurement time at which every populated pair has
/// coherent overlap below `threshold`.
pub fn completion_time(spec: &FockSpec, threshold: f64) -> Option<f64> {
    let pop = spec.populated();
    let gap = pop.windows(2).map(|w| w[1] - w[0]).min()?;
    let eps = spec.epsilon.norm();
    if eps == 0.0 {
        return None;
    }
    Some((8.0 * (1.0 / threshold).ln()).sqrt() / (gap as f64 * eps))
}

/// Premeasured state `Σ c_n |n⟩|β_n⟩` in the truncated space, object index
/// slowest.
pub fn premeasured_state(spec: &FockSpec, t: f64) -> Result<Vec<C64>> {
    spec.validate()?;
    check_cutoff(spec, t)?;
    let d = spec.cutoff;
    let mut psi = vec![C64::new(0.0, 0.0); spec.amplitudes.len() * d];
    for (n, c) in spec.amplitudes.iter().enumerate() {
        for (k, a) in coherent_state(spec.displacement(n, t), d).into_iter().enumerate() {
            psi[n * d + k] = c * a;
        }
    }
    Ok(psi)
}

fn check_cutoff(spec: &FockSpec, t: f64) -> Result<()> {
    let n = spec.amplitudes.len() - 1;
    let tail = coherent_tail(spec.displacement(n, t), spec.cutoff);
    if tail > TAIL_BOUND {
        return Err(Error::Cutoff(format!(
            "coherent tail {tail:.3e} past {} levels exceeds {TAIL_BOUND:e}",
            spec.cutoff
        )));
    }
    Ok(())
}

/// States after the environment has read the apparatus quadrature.
#[derive(Clone, Debug)]
pub struct ReadoutStates {
    /// Object ⊗ apparatus quadrature grid, object index slowest.
    pub rho_oa: DensityMatrix,
    pub rho_o: DensityMatrix,
    pub grid: Vec<f64>,
}

/// Quadrature wavefunction of `|β⟩`, `X = (b + b†)/√2`, sampled with the
/// grid spacing folded in.
fn quadrature_packet(beta: C64, grid: &[f64], h: f64) -> Vec<C64> {
    let (x0, p0) = (SQRT_2 * beta.re, SQRT_2 * beta.im);
    let norm = PI.powf(-0.25) * h.sqrt();
    grid.iter()
        .map(|&x| C64::from_polar(norm * (-(x - x0).powi(2) / 2.0).exp(), p0 * (x - x0 / 2.0)))
        .collect()
}

/// Object-apparatus state after premeasurement for `t_pre` and the
/// environment readout of `X` at `t0`.
pub fn readout_states(spec: &FockSpec) -> Result<ReadoutStates> {
    spec.validate()?;
    let m = spec.amplitudes.len();
    let centres: Vec<f64> = (0..m).map(|n| SQRT_2 * spec.displacement(n, spec.t_pre).re).collect();
    let lo = centres.iter().copied().fold(f64::INFINITY, f64::min) - QUADRATURE_MARGIN;
    let hi = centres.iter().copied().fold(f64::NEG_INFINITY, f64::max) + QUADRATURE_MARGIN;
    let grid = uniform_grid(QUADRATURE_POINTS, lo, hi);
    let h = grid[1] - grid[0];
    let packets: Vec<Vec<C64>> = (0..m)
        .map(|n| quadrature_packet(spec.displacement(n, spec.t_pre), &grid, h))
        .collect();
    let q = grid.len();
    let dim = m * q;
    let (lambda, s, t0) = (spec.law.lambda, spec.environment_spread, spec.t0);
    let gamma: Vec<f64> = grid
        .iter()
        .flat_map(|&x| grid.iter().map(move |&y| x - y))
        .map(|dx| gaussian_branch_trace(dx, t0, s, lambda))
        .collect();
    let c = &spec.amplitudes;
    let rows = map_range(spec.exec, dim, |r| {
        let (n, i) = (r / q, r % q);
        (0..dim)
            .map(|col| {
                let (mm, j) = (col / q, col % q);
                c[n] * c[mm].conj() * packets[n][i] * packets[mm][j].conj() * gamma[i * q + j]
            })
            .collect::<Vec<_>>()
    });
    let raw = ComplexMatrix::new(dim, dim, rows.into_iter().flatten().collect())?;
    // The quadrature grid drops the far Gaussian tails; restore unit trace.
    let tr = raw.trace().re;
    let rho_oa = validate_density(&raw.scale_real(1.0 / tr))?;
    let mut o = ComplexMatrix::zeros(m, m);
    for n in 0..m {
        for mm in 0..m {
            let terms: Vec<C64> = (0..q).map(|i| rho_oa.matrix()[(n * q + i, mm * q + i)]).collect();
            o[(n, mm)] = pairwise_sum(&terms);
        }
    }
    let rho_o = validate_density(&o)?;
    Ok(ReadoutStates { rho_oa, rho_o, grid })
}

/// Premeasurement and environment readout of an oscillator's number.
pub fn wcm_scenario(spec: &FockSpec) -> Result<ScenarioReport> {
    spec.validate()?;
    check_cutoff(spec, spec.t_pre)?;
    let mut r = ScenarioReport::new("wcm");
    r.param("cutoff", spec.cutoff)
        .param("levels", spec.amplitudes.len())
        .param("epsilon_re", spec.epsilon.re)
        .param("epsilon_im", spec.epsilon.im)
        .param("t_pre", spec.t_pre)
        .param("completion_threshold", spec.completion_threshold)
        .param("lambda", spec.law.lambda)
        .param("dt", spec.law.dt)
        .param("t0", spec.t0)
        .param("environment_spread", spec.environment_spread)
        .param("environment_modes", spec.kappa.len());

    let psi = premeasured_state(spec, spec.t_pre)?;
    let d = spec.cutoff;
    let pop = spec.populated();
    let mut worst: f64 = 0.0;
    let mut formula_err: f64 = 0.0;
    for (x, &m) in pop.iter().enumerate() {
        for &n in &pop[x + 1..] {
            let (bm, bn) = (spec.displacement(m, spec.t_pre), spec.displacement(n, spec.t_pre));
            let closed = coherent_overlap(bm, bn);
            let (am, an) = (spec.amplitudes[m], spec.amplitudes[n]);
            let inner: Vec<C64> = (0..d)
                .map(|k| (psi[m * d + k] / am).conj() * psi[n * d + k] / an)
                .collect();
            formula_err = formula_err.max((pairwise_sum(&inner).norm() - closed).abs());
            worst = worst.max(closed);
            r.diag(&format!("overlap({m},{n})"), closed);
        }
    }
    r.diag("overlap_formula_max_error", formula_err)
        .diag("max_overlap", worst)
        .verdict("premeasurement_complete", worst, Comparison::Below, spec.completion_threshold);
    if let Some(t) = completion_time(spec, spec.completion_threshold) {
        r.diag("completion_time", t);
    }
    r.note("premeasurement_complete", "coherent overlaps exp(-|m-n|^2 |eps|^2 t^2 / 8) below the threshold");

    let states = readout_states(spec)?;
    let m = spec.amplitudes.len();
    let q = states.grid.len();
    let mut diag_err: f64 = 0.0;
    let mut coherence: f64 = 0.0;
    for n in 0..m {
        diag_err = diag_err.max((states.rho_o.matrix()[(n, n)].re - spec.amplitudes[n].norm_sqr()).abs());
        for mm in 0..m {
            if mm != n {
                coherence = coherence.max(states.rho_o.matrix()[(n, mm)].norm());
                let block: f64 = (0..q)
                    .flat_map(|i| (0..q).map(move |j| (i, j)))
                    .map(|(i, j)| states.rho_oa.matrix()[(n * q + i, mm * q + j)].norm_sqr())
                    .sum();
                r.diag(&format!("branch_coherence({n},{mm})"), block.sqrt());
            }
        }
    }
    r.diag("object_diagonal_max_error", diag_err)
        .diag("object_coherence_max", coherence)
        .diag("object_purity", states.rho_o.purity())
        .diag("apparatus_purity", {
            let split = crate::qcore::SubsystemSplit::bipartite(m, q)?;
            states.rho_oa.partial_trace(&split, &[1])?.purity()
        });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_overlap_matches_formula() {
        let spec = FockSpec {
            amplitudes: vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)],
            epsilon: C64::new(0.6, 0.8),
            ..Default::default()
        };
        for t in [0.5, 2.0, 4.0] {
            let psi = premeasured_state(&spec, t).unwrap();
            let d = spec.cutoff;
            for (m, n) in [(0, 1), (0, 2), (1, 2)] {
                let inner: C64 = (0..d)
                    .map(|k| (psi[m * d + k] / spec.amplitudes[m]).conj() * psi[n * d + k] / spec.amplitudes[n])
                    .sum();
                let closed = (-((m as f64 - n as f64).powi(2)) * t * t / 8.0).exp();
                assert!((inner.norm() - closed).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn two_branches_complete_at_six() {
        let spec = FockSpec {
            completion_threshold: 0.0125,
            ..Default::default()
        };
        let r = wcm_scenario(&spec).unwrap();
        assert!((r.value("overlap(0,1)").unwrap() - (-4.5f64).exp()).abs() < 1e-15);
        assert!(r.find_verdict("premeasurement_complete").unwrap().passed);
        assert!(r.value("overlap_formula_max_error").unwrap() < 1e-8);
    }

    #[test]
    fn object_populations_survive() {
        let r = wcm_scenario(&FockSpec::default()).unwrap();
        assert!(r.value("object_diagonal_max_error").unwrap() < 1e-12);
        assert!(r.value("object_coherence_max").unwrap() < 0.01);
        let early = wcm_scenario(&FockSpec {
            t0: 0.0,
            ..Default::default()
        })
        .unwrap();
        let ratio = r.value("branch_coherence(0,1)").unwrap() / early.value("branch_coherence(0,1)").unwrap();
        assert!(ratio < 0.01, "{ratio}");
    }

    #[test]
    fn single_level_stays_pure() {
        let spec = FockSpec {
            amplitudes: vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ..Default::default()
        };
        let r = wcm_scenario(&spec).unwrap();
        assert!((r.value("object_purity").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_cutoff_is_rejected() {
        let spec = FockSpec {
            cutoff: 20,
            ..Default::default()
        };
        assert!(matches!(wcm_scenario(&spec), Err(Error::Cutoff(_))));
    }

    #[test]
    fn completion_time_formula() {
        let spec = FockSpec::default();
        let t = completion_time(&spec, 0.01).unwrap();
        assert!((coherent_overlap(spec.displacement(0, t), spec.displacement(1, t)) - 0.01).abs() < 1e-14);
    }
}
