use super::BranchFamily;
use crate::error::{Error, Result};
use crate::exec::{map_range, pairwise_sum, Exec};
use crate::C64;
use serde::{Deserialize, Serialize};

/// `χ(t) = Σ_β p_β e^{-i ω_β t}` together with the damping it came from.
///
/// The branch quantity it describes equals `ζ χ(t0)` times a
/// `t0`-independent phase, with `ζ = Σ_β |d_β|² ε_β`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationAmplitude {
    pub p: Vec<f64>,
    pub omega: Vec<f64>,
    pub zeta: f64,
    pub epsilon: Vec<f64>,
}

impl CorrelationAmplitude {
    /// Plain amplitude with `ζ = 1` and no damping.
    pub fn new(p: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if p.len() != omega.len() || p.is_empty() {
            return Err(Error::Dimension(format!(
                "{} weights for {} frequencies",
                p.len(),
                omega.len()
            )));
        }
        if p.iter().any(|&w| !(w >= 0.0)) || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("weights must be non-negative, frequencies finite".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("weights sum to {total}")));
        }
        let epsilon = vec![1.0; p.len()];
        Ok(Self {
            p,
            omega,
            zeta: 1.0,
            epsilon,
        })
    }

    fn from_damped(weights: Vec<f64>, omega: Vec<f64>, epsilon: Vec<f64>) -> Self {
        let damped: Vec<f64> = weights.iter().zip(&epsilon).map(|(w, e)| w * e).collect();
        let zeta = pairwise_sum(&damped);
        let p = if zeta > 0.0 {
            damped.iter().map(|x| x / zeta).collect()
        } else {
            weights
        };
        Self {
            p,
            omega,
            zeta,
            epsilon,
        }
    }

    /// Amplitude of `tr ρ_αα'(t0) = ζ χ(t0)`, with
    /// `ω_β = h_αβ - h_α'β` and `ε_β = e^{-ω_β² / 4λ}`.
    pub fn trace_form(family: &BranchFamily, alpha: usize, alpha_prime: usize) -> Self {
        let h = family.interaction();
        let lambda = family.law().lambda();
        let weights: Vec<f64> = family.d().iter().map(|d| d.norm_sqr()).collect();
        let omega: Vec<f64> = (0..family.dim_a())
            .map(|b| h.level(alpha, b) - h.level(alpha_prime, b))
            .collect();
        let epsilon = omega.iter().map(|w| (-w * w / (4.0 * lambda)).exp()).collect();
        Self::from_damped(weights, omega, epsilon)
    }

    /// Amplitude of the entry `(ρ_α ρ_α')_{ββ''}`:
    /// `d_β d_β''* e^{-i t0 (h_αβ - h_α'β'')} ζ χ(t0)` with
    /// `ω_β' = h_α'β' - h_αβ'` and
    /// `ε_β' = exp(-[(h_αβ - h_αβ')² + (h_α'β' - h_α'β'')²] / 4λ)`.
    pub fn product_form(
        family: &BranchFamily,
        alpha: usize,
        alpha_prime: usize,
        beta: usize,
        beta_second: usize,
    ) -> Self {
        let h = family.interaction();
        let lambda = family.law().lambda();
        let weights: Vec<f64> = family.d().iter().map(|d| d.norm_sqr()).collect();
        let omega: Vec<f64> = (0..family.dim_a())
            .map(|b| h.level(alpha_prime, b) - h.level(alpha, b))
            .collect();
        let epsilon = (0..family.dim_a())
            .map(|b| {
                let x = h.level(alpha, beta) - h.level(alpha, b);
                let y = h.level(alpha_prime, b) - h.level(alpha_prime, beta_second);
                (-(x * x + y * y) / (4.0 * lambda)).exp()
            })
            .collect();
        Self::from_damped(weights, omega, epsilon)
    }

    /// `χ(t)`.
    pub fn at(&self, t: f64) -> C64 {
        self.p
            .iter()
            .zip(&self.omega)
            .map(|(&p, &w)| C64::from_polar(p, -w * t))
            .sum()
    }

    /// `ζ χ(t)`.
    pub fn scaled_at(&self, t: f64) -> C64 {
        self.at(t) * self.zeta
    }
}

/// Window average of `f` and of `|f|²` over `[start, start + length]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowAverage {
    pub mean: C64,
    pub mean_modulus_sqr: f64,
    pub samples: usize,
}

/// Fewest midpoint samples accepted by [`window_average`].
pub const MIN_WINDOW_SAMPLES: usize = 256;

/// Midpoint-rule average over a window.
pub fn window_average<F>(
    f: F,
    start: f64,
    length: f64,
    samples: usize,
    exec: Exec,
) -> Result<WindowAverage>
where
    F: Fn(f64) -> C64 + Sync + Send,
{
    if !(length > 0.0 && length.is_finite()) || !start.is_finite() {
        return Err(Error::Parameter(format!("window [{start}, +{length}] is invalid")));
    }
    if samples < MIN_WINDOW_SAMPLES {
        return Err(Error::Parameter(format!(
            "window average needs at least {MIN_WINDOW_SAMPLES} samples, got {samples}"
        )));
    }
    let h = length / samples as f64;
    let values = map_range(exec, samples, |k| f(start + (k as f64 + 0.5) * h));
    let n = samples as f64;
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    let sq: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
    Ok(WindowAverage {
        mean: C64::new(pairwise_sum(&re) / n, pairwise_sum(&im) / n),
        mean_modulus_sqr: pairwise_sum(&sq) / n,
        samples,
    })
}
