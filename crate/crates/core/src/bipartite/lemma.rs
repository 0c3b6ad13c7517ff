use super::{branch_operator, window_average, BranchFamily, CorrelationAmplitude};
use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Thresholds for the branch-decoherence check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaConfig {
    /// Bound on the window-averaged `|tr ρ_αα'|²` and `‖ρ_α ρ_α'‖²_F`.
    pub epsilon: f64,
    /// Informational: fraction of sampled `t0` at which the squared value
    /// itself must lie below `epsilon` to count as "most".
    pub required_fraction: f64,
    /// Minimum midpoint samples for the window averages; raised as needed so
    /// the fastest oscillation is resolved.
    pub window_samples: usize,
    pub exec: Exec,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            required_fraction: 0.9,
            window_samples: 256,
            exec: Exec::Parallel,
        }
    }
}

/// Diagnostics of one pair of branches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDiagnostics {
    pub alpha: usize,
    pub alpha_prime: usize,
    /// `|tr ρ_αα'(t0)|` at each sampled `t0`.
    pub trace_modulus: Vec<f64>,
    /// `‖ρ_α(t0) ρ_α'(t0)‖_F` at each sampled `t0`.
    pub overlap: Vec<f64>,
    /// Window average of `|tr ρ_αα'|²`.
    pub trace_second_moment: f64,
    /// Window average of `‖ρ_α ρ_α'‖²_F`.
    pub overlap_second_moment: f64,
    /// Fraction of sampled `t0` with `|tr|² < ε`.
    pub trace_fraction_below: f64,
    /// Fraction of sampled `t0` with `‖ρ_α ρ_α'‖²_F < ε`.
    pub overlap_fraction_below: f64,
    pub trace_condition: bool,
    pub overlap_condition: bool,
}

/// Whether branch traces and products are small for most large `t0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma41Report {
    pub t0_samples: Vec<f64>,
    pub window_start: f64,
    pub window_length: f64,
    pub epsilon: f64,
    pub pairs: Vec<PairDiagnostics>,
    pub satisfied: bool,
}

impl Lemma41Report {
    pub fn max_trace_second_moment(&self) -> f64 {
        self.pairs.iter().map(|p| p.trace_second_moment).fold(0.0, f64::max)
    }

    pub fn max_overlap_second_moment(&self) -> f64 {
        self.pairs.iter().map(|p| p.overlap_second_moment).fold(0.0, f64::max)
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Window `[T, 2T]` of "large" readout times, `T = periods · 2π / median|ω|`
/// over the non-zero branch-trace frequencies.
pub fn large_t0_window(family: &BranchFamily, periods: f64) -> Result<(f64, f64)> {
    let pop = family.populated();
    let mut freqs = Vec::new();
    for (i, &a) in pop.iter().enumerate() {
        for &ap in &pop[i + 1..] {
            let ca = CorrelationAmplitude::trace_form(family, a, ap);
            freqs.extend(
                ca.omega
                    .iter()
                    .zip(family.d())
                    .filter(|(w, d)| w.abs() > 1e-12 && d.norm_sqr() > 0.0)
                    .map(|(w, _)| w.abs()),
            );
        }
    }
    let med = median(freqs).ok_or_else(|| {
        Error::Parameter("branches share every level: no frequencies to average over".into())
    })?;
    let t = periods * 2.0 * PI / med;
    Ok((t, t))
}

/// `count` evenly spaced points from `start` to `start + length` inclusive.
pub fn sample_window(start: f64, length: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|k| start + length * k as f64 / (count - 1) as f64)
        .collect()
}

/// `count` points spread over `[start, start + length)` by the golden-ratio
/// sequence, sorted. Unlike an even grid this never locks onto a revival
/// period commensurate with the spacing.
pub fn equidistributed_window(start: f64, length: f64, count: usize) -> Vec<f64> {
    let step = 0.5 * (5f64.sqrt() - 1.0);
    let mut t: Vec<f64> = (0..count)
        .map(|k| start + length * (0.5 + k as f64 * step).fract())
        .collect();
    t.sort_by(f64::total_cmp);
    t
}

/// Largest sample count a window average is allowed to grow to.
const MAX_WINDOW_SAMPLES: usize = 1 << 16;

/// Midpoint count resolving every frequency of `|tr|²` and `‖ρ_α ρ_α'‖²`,
/// which are bounded by twice the spread of populated levels.
fn resolved_samples(family: &BranchFamily, length: f64, floor: usize) -> usize {
    let h = family.interaction();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in family.populated() {
        for (b, d) in family.d().iter().enumerate() {
            if d.norm_sqr() > 0.0 {
                lo = lo.min(h.level(a, b));
                hi = hi.max(h.level(a, b));
            }
        }
    }
    let omega = 2.0 * (hi - lo);
    let needed = (2.0 * length * omega / PI).ceil();
    if needed.is_finite() {
        floor.max(needed as usize).min(MAX_WINDOW_SAMPLES)
    } else {
        floor
    }
}

fn overlap_at(family: &BranchFamily, a: usize, ap: usize, t0: f64) -> Result<f64> {
    let law = family.law().with_t0(t0)?;
    let ra = branch_operator(family.interaction(), family.d(), a, a, &law);
    let rb = branch_operator(family.interaction(), family.d(), ap, ap, &law);
    Ok(ra.dot(&rb).frobenius_norm())
}

/// Checks that `tr ρ_αα'` and `ρ_α ρ_α'` are small over the sampled window,
/// for every pair of populated branches.
///
/// The verdict compares window second moments with `ε`. The `t0` samples
/// must number at least eight; they fix the window as their span.
pub fn lemma41_report(
    family: &BranchFamily,
    t0_samples: &[f64],
    cfg: &LemmaConfig,
) -> Result<Lemma41Report> {
    if t0_samples.len() < 8 {
        return Err(Error::Parameter(format!(
            "need at least 8 readout times, got {}",
            t0_samples.len()
        )));
    }
    let lo = t0_samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t0_samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let length = hi - lo;
    let samples = resolved_samples(family, length, cfg.window_samples);
    let pop = family.populated();
    let mut pairs = Vec::new();
    for (i, &a) in pop.iter().enumerate() {
        for &ap in &pop[i + 1..] {
            let ca = CorrelationAmplitude::trace_form(family, a, ap);
            let trace_modulus: Vec<f64> = t0_samples.iter().map(|&t| ca.scaled_at(t).norm()).collect();
            let overlap = map_range(cfg.exec, t0_samples.len(), |k| {
                overlap_at(family, a, ap, t0_samples[k])
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let trace_avg = window_average(|t| ca.scaled_at(t), lo, length, samples, cfg.exec)?;
            let overlap_avg = window_average(
                |t| C64::new(overlap_at(family, a, ap, t).unwrap_or(f64::NAN).powi(2), 0.0),
                lo,
                length,
                samples,
                cfg.exec,
            )?;
            let n = t0_samples.len() as f64;
            let frac = |v: &[f64]| v.iter().filter(|x| x.powi(2) < cfg.epsilon).count() as f64 / n;
            let trace_second_moment = trace_avg.mean_modulus_sqr;
            let overlap_second_moment = overlap_avg.mean.re;
            if !overlap_second_moment.is_finite() {
                return Err(Error::Parameter("readout window produced an invalid time".into()));
            }
            pairs.push(PairDiagnostics {
                alpha: a,
                alpha_prime: ap,
                trace_fraction_below: frac(&trace_modulus),
                overlap_fraction_below: frac(&overlap),
                trace_modulus,
                overlap,
                trace_second_moment,
                overlap_second_moment,
                trace_condition: trace_second_moment < cfg.epsilon,
                overlap_condition: overlap_second_moment < cfg.epsilon,
            });
        }
    }
    let satisfied = pairs.iter().all(|p| p.trace_condition && p.overlap_condition);
    Ok(Lemma41Report {
        t0_samples: t0_samples.to_vec(),
        window_start: lo,
        window_length: length,
        epsilon: cfg.epsilon,
        pairs,
        satisfied,
    })
}
