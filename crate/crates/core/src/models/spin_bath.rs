//! A register of object levels `a_i` dephased by `N` bath qubits through
//! `H = A ⊗ Σ_k g_k σ_z^{(k)}`.
//!
//! Every apparatus quantity depends on a bath configuration only through the
//! collective coupling `G = Σ_k g̃_k s_k` (`s_k = ±1`, `g̃_k = w g_k`). Grouping
//! configurations by `G` is an isometry onto the span of the grouped states,
//! so the branch family over the distinct values of `G`, with amplitudes
//! `√P(G)`, reproduces every trace, product and entropy exactly while
//! staying polynomial in `N` for commensurate couplings.

use super::report::{Comparison, ScenarioReport};
use crate::bipartite::{
    equidistributed_window, large_t0_window, lemma41_report, mutual_information, sample_window, uniqueness_scan,
    BranchFamily, LemmaConfig, SeparableInteraction, UniquenessConfig, UniquenessReport,
};
use crate::error::{Error, Result};
use crate::exec::{map_range, pairwise_reduce, pairwise_sum, Exec};
use crate::localtime::{coherence_factor, LawParameters, Preset, TimeBound};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest bath enumerated configuration by configuration.
pub const MAX_EXACT_QUBITS: usize = 24;
/// Largest bath evaluated exactly under [`BathMode::Auto`].
pub const AUTO_EXACT_QUBITS: usize = 14;
/// Samples drawn from one generator stream.
pub const SAMPLE_CHUNK: usize = 4096;
/// Generator stream reserved for drawing random couplings.
const COUPLING_STREAM: u64 = u64::MAX;
/// Relative resolution at which two collective couplings are merged.
const KEY_QUANTUM: f64 = 1e-11;

/// How the branch trace over the readout grid is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathMode {
    /// Sum over all `2^N` configurations.
    Exact,
    /// Seeded configuration sampling.
    MonteCarlo,
    /// Exact up to [`AUTO_EXACT_QUBITS`] qubits, sampled beyond.
    #[default]
    Auto,
}

/// Inputs of the qubit-bath scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinBathSpec {
    /// Raw couplings `g_k`.
    pub couplings: Vec<f64>,
    /// Common weight `w`: the effective coupling is `w g_k`.
    pub coupling_weight: f64,
    /// Object eigenvalues `a_i`.
    pub spectrum: Vec<f64>,
    /// Object amplitudes, one per eigenvalue.
    pub object: Vec<C64>,
    /// `(a_k, b_k)` of each bath qubit on `(|+⟩, |-⟩)`.
    pub bath: Vec<[C64; 2]>,
    /// Optional coarse-grained value for each eigenvalue.
    pub coarse_map: Option<Vec<f64>>,
    pub law: LawParameters,
    pub t0_grid: Vec<f64>,
    pub mode: BathMode,
    pub samples: usize,
    pub seed: u64,
    /// Branch pair whose trace is followed over the grid.
    pub trace_pair: (usize, usize),
    /// Readout times sampled in the large-`t0` window.
    pub window_points: usize,
    /// Largest number of distinct collective couplings kept for the exact
    /// branch family.
    pub compression_cap: usize,
    pub exec: Exec,
}

fn uniform_amplitudes(n: usize) -> Vec<C64> {
    vec![C64::new((n as f64).recip().sqrt(), 0.0); n]
}

impl SpinBathSpec {
    /// `g_k = k/N` with weight `1/N`, `a = ±1`, balanced object and bath.
    pub fn preset(n: usize) -> Self {
        let (dt, lambda) = Preset::SpinBath.pair();
        let half = uniform_amplitudes(2)[0];
        Self {
            couplings: (1..=n).map(|k| k as f64 / n as f64).collect(),
            coupling_weight: 1.0 / n.max(1) as f64,
            spectrum: vec![1.0, -1.0],
            object: uniform_amplitudes(2),
            bath: vec![[half; 2]; n],
            coarse_map: None,
            law: LawParameters { dt, lambda },
            t0_grid: sample_window(0.0, 20.0, 64),
            mode: BathMode::Auto,
            samples: 100_000,
            seed: 0,
            trace_pair: (0, 1),
            window_points: 16,
            compression_cap: 2048,
            exec: Exec::Parallel,
        }
    }

    /// Preset with couplings drawn uniformly from `(0, 1)`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(COUPLING_STREAM);
        Self {
            couplings: (0..n).map(|_| 1.0 - rng.random::<f64>()).collect(),
            seed,
            ..Self::preset(n)
        }
    }

    /// Preset bath read out by a four-level object `{-2, -1, 1, 2}`, coarse
    /// grained to `{-2, 0, 2}`.
    pub fn extended(n: usize) -> Self {
        Self {
            spectrum: vec![-2.0, -1.0, 1.0, 2.0],
            object: uniform_amplitudes(4),
            coarse_map: Some(vec![-2.0, 0.0, 0.0, 2.0]),
            ..Self::preset(n)
        }
    }

    pub fn qubits(&self) -> usize {
        self.couplings.len()
    }

    /// Effective couplings `w g_k`.
    pub fn effective_couplings(&self) -> Vec<f64> {
        self.couplings.iter().map(|g| self.coupling_weight * g).collect()
    }

    /// `|a_k|²`, the probability of `s_k = +1`.
    pub fn up_probabilities(&self) -> Vec<f64> {
        self.bath.iter().map(|q| q[0].norm_sqr()).collect()
    }

    /// `Σ_k |g̃_k|`, the largest attainable `|G|`.
    pub fn coupling_span(&self) -> f64 {
        pairwise_sum(&self.effective_couplings().iter().map(|g| g.abs()).collect::<Vec<_>>())
    }

    fn is_preset(&self) -> bool {
        let p = Self::preset(self.qubits());
        self.couplings == p.couplings
            && self.coupling_weight == p.coupling_weight
            && self.spectrum == p.spectrum
            && self.object == p.object
            && self.bath == p.bath
            && self.law == p.law
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.qubits();
        if n < 2 {
            return Err(Error::Parameter(format!("need at least 2 bath qubits, got {n}")));
        }
        if self.bath.len() != n {
            return Err(Error::Dimension(format!("{} couplings for {} qubits", n, self.bath.len())));
        }
        if self.couplings.iter().any(|g| !g.is_finite())
            || !(self.coupling_weight.is_finite() && self.coupling_weight > 0.0)
        {
            return Err(Error::Parameter("couplings must be finite, weight positive".into()));
        }
        for (k, q) in self.bath.iter().enumerate() {
            let norm = q[0].norm_sqr() + q[1].norm_sqr();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Normalization(format!("bath qubit {k} has norm² {norm}")));
            }
        }
        if self.spectrum.len() < 2 || self.spectrum.len() != self.object.len() {
            return Err(Error::Dimension(format!(
                "{} eigenvalues for {} object amplitudes",
                self.spectrum.len(),
                self.object.len()
            )));
        }
        if self.spectrum.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parameter("object eigenvalues must be finite".into()));
        }
        let norm: f64 = self.object.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization(format!("object state has norm² {norm}")));
        }
        if let Some(map) = &self.coarse_map {
            if map.len() != self.spectrum.len() || map.iter().any(|a| !a.is_finite()) {
                return Err(Error::Dimension("coarse map must assign one finite value per eigenvalue".into()));
            }
        }
        let (i, j) = self.trace_pair;
        if i == j || i >= self.spectrum.len() || j >= self.spectrum.len() {
            return Err(Error::Parameter(format!("invalid branch pair {:?}", self.trace_pair)));
        }
        if self.samples == 0 || self.t0_grid.is_empty() {
            return Err(Error::Parameter("need at least one sample and one readout time".into()));
        }
        self.law.at(0.0)?;
        Ok(())
    }

    fn resolved_mode(&self) -> Result<BathMode> {
        match self.mode {
            BathMode::Exact if self.qubits() > MAX_EXACT_QUBITS => Err(Error::Size(format!(
                "exact evaluation enumerates 2^{} configurations; the limit is 2^{MAX_EXACT_QUBITS}",
                self.qubits()
            ))),
            BathMode::Auto if self.qubits() <= AUTO_EXACT_QUBITS => Ok(BathMode::Exact),
            BathMode::Auto => Ok(BathMode::MonteCarlo),
            m => Ok(m),
        }
    }
}

/// Distribution of `G = Σ_k g_k s_k` with `P(s_k = +1) = p_k`, as sorted
/// `(G, P(G))` pairs. `None` once more than `cap` distinct values appear.
pub fn coupling_distribution(couplings: &[f64], up: &[f64], cap: usize) -> Option<Vec<(f64, f64)>> {
    let span: f64 = couplings.iter().map(|g| g.abs()).sum();
    let quantum = KEY_QUANTUM * span.max(f64::MIN_POSITIVE);
    let mut dist: BTreeMap<i64, (f64, f64)> = BTreeMap::from([(0, (0.0, 1.0))]);
    for (&g, &p) in couplings.iter().zip(up) {
        let mut next: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        for &(value, prob) in dist.values() {
            for (s, w) in [(1.0, p), (-1.0, 1.0 - p)] {
                if w == 0.0 {
                    continue;
                }
                let v = value + s * g;
                let entry = next.entry((v / quantum).round() as i64).or_insert((v, 0.0));
                entry.1 += prob * w;
            }
        }
        if next.len() > cap {
            return None;
        }
        dist = next;
    }
    Some(dist.into_values().collect())
}

/// Exact branch family over the distinct collective couplings, at readout
/// centre `t0`.
pub fn spin_bath_family(spec: &SpinBathSpec, t0: f64) -> Result<BranchFamily> {
    spec.validate()?;
    let dist = coupling_distribution(&spec.effective_couplings(), &spec.up_probabilities(), spec.compression_cap)
        .ok_or_else(|| {
            Error::Size(format!(
                "more than {} distinct collective couplings",
                spec.compression_cap
            ))
        })?;
    let a = &spec.spectrum;
    let h = SeparableInteraction::from_fn(a.len(), dist.len(), |i, g| a[i] * dist[g].0)?;
    let d = dist.iter().map(|&(_, p)| C64::new(p.sqrt(), 0.0)).collect();
    BranchFamily::new(h, spec.object.clone(), d, spec.law.at(t0)?)
}

/// `e^{-i t0 Δa G} e^{-(Δa G)² / 4λ}` for one configuration.
fn trace_term(delta_a: f64, g: f64, t0: f64, lambda: f64) -> C64 {
    let w = delta_a * g;
    C64::from_polar((-w * w / (4.0 * lambda)).exp(), -t0 * w)
}

fn add_vectors(mut a: Vec<C64>, b: Vec<C64>) -> Vec<C64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// `tr ρ_ij(t0)` over `t0_grid` by summing all `2^N` configurations.
pub fn trace_exact(spec: &SpinBathSpec, pair: (usize, usize), t0_grid: &[f64]) -> Result<Vec<C64>> {
    spec.validate()?;
    let n = spec.qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::Size(format!("2^{n} configurations exceed 2^{MAX_EXACT_QUBITS}")));
    }
    let g = spec.effective_couplings();
    let up = spec.up_probabilities();
    let delta_a = spec.spectrum[pair.0] - spec.spectrum[pair.1];
    let lambda = spec.law.lambda;
    let total = 1usize << n;
    let blocks = total.div_ceil(SAMPLE_CHUNK);
    let partial = map_range(spec.exec, blocks, |b| {
        let configs: Vec<(f64, f64)> = (b * SAMPLE_CHUNK..((b + 1) * SAMPLE_CHUNK).min(total))
            .map(|m| {
                (0..n).fold((0.0, 1.0), |(acc, p), k| {
                    if m >> k & 1 == 0 {
                        (acc + g[k], p * up[k])
                    } else {
                        (acc - g[k], p * (1.0 - up[k]))
                    }
                })
            })
            .collect();
        t0_grid
            .iter()
            .map(|&t| {
                let terms: Vec<C64> = configs
                    .iter()
                    .map(|&(gv, p)| trace_term(delta_a, gv, t, lambda) * p)
                    .collect();
                pairwise_sum(&terms)
            })
            .collect::<Vec<C64>>()
    });
    Ok(pairwise_reduce(partial, add_vectors).unwrap_or_default())
}

/// A sampled mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: C64,
    pub standard_error: f64,
    pub samples: usize,
}

/// `tr ρ_ij(t0)` over `t0_grid` by sampling configurations.
///
/// Chunk `c` of [`SAMPLE_CHUNK`] samples draws from `ChaCha8` seeded with
/// `seed` on stream `c`, so results do not depend on the thread count.
pub fn trace_monte_carlo(
    spec: &SpinBathSpec,
    pair: (usize, usize),
    t0_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate>> {
    spec.validate()?;
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let g = spec.effective_couplings();
    let up = spec.up_probabilities();
    let delta_a = spec.spectrum[pair.0] - spec.spectrum[pair.1];
    let lambda = spec.law.lambda;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let partial = map_range(spec.exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
        let draws: Vec<f64> = (0..count)
            .map(|_| {
                g.iter()
                    .zip(&up)
                    .map(|(&gk, &p)| if rng.random::<f64>() < p { gk } else { -gk })
                    .sum()
            })
            .collect();
        // Per readout time: (Σ z, Σ |z|²) with the second sum in the real part.
        t0_grid
            .iter()
            .flat_map(|&t| {
                let z: Vec<C64> = draws.iter().map(|&gv| trace_term(delta_a, gv, t, lambda)).collect();
                let sq: Vec<C64> = z.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
                [pairwise_sum(&z), pairwise_sum(&sq)]
            })
            .collect::<Vec<C64>>()
    });
    let sums = pairwise_reduce(partial, add_vectors).unwrap_or_default();
    let n = samples as f64;
    Ok(sums
        .chunks_exact(2)
        .map(|s| {
            let mean = s[0] / n;
            let var = (s[1].re / n - mean.norm_sqr()).max(0.0);
            MonteCarloEstimate {
                mean,
                standard_error: (var / n).sqrt(),
                samples,
            }
        })
        .collect())
}

/// Extreme Gaussian factors of `ρ_ij` over configurations where all bath
/// qubits of each side point the same way: `(smallest, largest)`.
pub fn uniform_configuration_factors(a: f64, b: f64, span: f64, lambda: f64) -> (f64, f64) {
    let smallest = coherence_factor((a.abs() + b.abs()) * span, lambda);
    let largest = coherence_factor((a - b).abs().min((a + b).abs()) * span, lambda);
    (smallest, largest)
}

/// Smallest factor `exp(-(Σ_{k≤M} g̃_k - Σ_{k>M} g̃_k)² / 4λ)` over split
/// points `M`, couplings taken in order.
pub fn split_terms_min(couplings: &[f64], lambda: f64) -> f64 {
    let total: f64 = couplings.iter().sum();
    let mut head = 0.0;
    let mut smallest = coherence_factor(total, lambda);
    for g in couplings {
        head += g;
        smallest = smallest.min(coherence_factor(2.0 * head - total, lambda));
    }
    smallest
}

/// Moments behind the energy-time bound of the bath interaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathMoments {
    pub mean: f64,
    pub std: f64,
    /// `⟨H⟩ - E_g` with `E_g = -max|a_i| Σ|g̃_k|`.
    pub gap: f64,
    /// `√(Σ_k w g_k²)`: the spread quoted for balanced baths with the
    /// couplings read as equally likely values.
    pub weighted_spread: f64,
}

pub fn bath_moments(spec: &SpinBathSpec) -> BathMoments {
    let g = spec.effective_couplings();
    let up = spec.up_probabilities();
    let mean_g: f64 = g.iter().zip(&up).map(|(g, p)| g * (2.0 * p - 1.0)).sum();
    let var_g: f64 = g.iter().zip(&up).map(|(g, p)| 4.0 * g * g * p * (1.0 - p)).sum();
    let weights: Vec<f64> = spec.object.iter().map(|c| c.norm_sqr()).collect();
    let mean_a: f64 = weights.iter().zip(&spec.spectrum).map(|(w, a)| w * a).sum();
    let mean_a2: f64 = weights.iter().zip(&spec.spectrum).map(|(w, a)| w * a * a).sum();
    let mean = mean_a * mean_g;
    let second = mean_a2 * (var_g + mean_g * mean_g);
    let max_a = spec.spectrum.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let weighted: f64 = spec.couplings.iter().map(|g| spec.coupling_weight * g * g).sum();
    BathMoments {
        mean,
        std: (second - mean * mean).max(0.0).sqrt(),
        gap: max_a * spec.coupling_span() + mean,
        weighted_spread: weighted.sqrt(),
    }
}

fn pair_label(prefix: &str, a: f64, b: f64, what: &str) -> String {
    format!("{prefix}({a},{b}).{what}")
}

fn distinct(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in values {
        if !out.iter().any(|&u| u == v) {
            out.push(v);
        }
    }
    out
}

fn factor_rows(r: &mut ScenarioReport, prefix: &str, values: &[f64], span: f64, lambda: f64) {
    let vals = distinct(values);
    for (x, &a) in vals.iter().enumerate() {
        for &b in &vals[x + 1..] {
            let (s, l) = uniform_configuration_factors(a, b, span, lambda);
            r.factor(&pair_label(prefix, a, b, "smallest_factor"), s, None)
                .factor(&pair_label(prefix, a, b, "largest_factor"), l, None);
        }
    }
}

/// Readout times spanning the large-`t0` window of `family`.
pub fn large_t0_samples(family: &BranchFamily, count: usize) -> Result<Vec<f64>> {
    let (start, len) = large_t0_window(family, 50.0)?;
    Ok(equidistributed_window(start, len, count))
}

/// Uniqueness scan of the bath-induced pointer basis over large readout
/// times.
pub fn spin_bath_uniqueness(spec: &SpinBathSpec, cfg: &UniquenessConfig) -> Result<UniquenessReport> {
    let family = spin_bath_family(spec, 0.0)?;
    let t0s = large_t0_samples(&family, spec.window_points.max(8))?;
    uniqueness_scan(&family, &t0s, cfg)
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Qubit-bath dephasing of an object register.
pub fn spin_bath_scenario(spec: &SpinBathSpec) -> Result<ScenarioReport> {
    spec.validate()?;
    let mode = spec.resolved_mode()?;
    let preset = spec.is_preset();
    let paper = |v: f64| preset.then_some(v);
    let lambda = spec.law.lambda;
    let g = spec.effective_couplings();
    let span = spec.coupling_span();
    let mut r = ScenarioReport::new("spin_bath");
    r.param("n", spec.qubits())
        .param("coupling_weight", spec.coupling_weight)
        .param("couplings", join(&spec.couplings))
        .param("spectrum", join(&spec.spectrum))
        .param("lambda", lambda)
        .param("dt", spec.law.dt)
        .param("seed", spec.seed)
        .param("samples", spec.samples)
        .param("trace_pair", format!("{},{}", spec.trace_pair.0, spec.trace_pair.1))
        .param(
            "mode",
            match mode {
                BathMode::Exact => "exact",
                _ => "monte_carlo",
            },
        )
        .param("t0_count", spec.t0_grid.len())
        .param("t0_start", spec.t0_grid[0])
        .param("t0_stop", *spec.t0_grid.last().expect("non-empty grid"));
    if let Some(map) = &spec.coarse_map {
        r.param("coarse_map", join(map));
    }

    let (i, j) = spec.trace_pair;
    let (a, b) = (spec.spectrum[i], spec.spectrum[j]);
    let (smallest, largest) = uniform_configuration_factors(a, b, span, lambda);
    r.factor("smallest_factor", smallest, paper((-0.25f64).exp()))
        .factor("largest_factor", largest, None)
        .factor("split_terms_min", split_terms_min(&g, lambda), paper(0.94));
    r.note("smallest_factor", "published as 0.779 and 0.778 for the many-qubit limit");
    r.note(
        "split_terms_min",
        "min over M of exp(-(sum_{k<=M} g_k - sum_{k>M} g_k)^2 / 4 lambda); published as not less than 0.94",
    );
    if distinct(&spec.spectrum).len() > 2 {
        factor_rows(&mut r, "pair", &spec.spectrum, span, lambda);
    }
    if let Some(map) = &spec.coarse_map {
        factor_rows(&mut r, "coarse_pair", map, span, lambda);
    }

    let m = bath_moments(spec);
    let paper_bound = TimeBound::from_moments(m.weighted_spread, m.gap)?;
    r.diag_ref("delta_h_weighted", m.weighted_spread, paper(3f64.sqrt().recip()))
        .diag("delta_h", m.std)
        .diag("mean_energy", m.mean)
        .diag_ref("ground_gap", m.gap, paper(0.5))
        .diag_ref("tau_min_half", paper_bound.tau_min / 2.0, paper(std::f64::consts::FRAC_PI_2))
        .diag("window_mass", spec.law.at(0.0)?.window_mass())
        .verdict("window_inside_time_bound", 2.0 * spec.law.dt, Comparison::Below, paper_bound.tau_min);
    if m.std > 0.0 {
        let exact_bound = TimeBound::from_moments(m.std, m.gap)?;
        r.diag("tau_min_half_exact_spread", exact_bound.tau_min / 2.0);
    }
    r.note(
        "tau_min_half",
        "bound from the weighted spread and the ground gap; published values are the many-qubit limits",
    );

    match mode {
        BathMode::Exact => {
            let tr = trace_exact(spec, spec.trace_pair, &spec.t0_grid)?;
            for (k, z) in tr.iter().enumerate() {
                r.diag(&format!("trace_trajectory[{k}].re"), z.re)
                    .diag(&format!("trace_trajectory[{k}].im"), z.im);
            }
        }
        _ => {
            let est = trace_monte_carlo(spec, spec.trace_pair, &spec.t0_grid, spec.samples, spec.seed)?;
            for (k, e) in est.iter().enumerate() {
                r.diag(&format!("trace_trajectory[{k}].re"), e.mean.re)
                    .diag(&format!("trace_trajectory[{k}].im"), e.mean.im)
                    .diag(&format!("trace_trajectory[{k}].standard_error"), e.standard_error);
            }
        }
    }

    match spin_bath_family(spec, 0.0) {
        Ok(family) => {
            r.diag("collective_levels", family.dim_a() as f64);
            let t0s = large_t0_samples(&family, spec.window_points.max(8))?;
            let cfg = LemmaConfig {
                exec: spec.exec,
                ..LemmaConfig::default()
            };
            let lemma = lemma41_report(&family, &t0s, &cfg)?;
            let worst = lemma.max_trace_second_moment().max(lemma.max_overlap_second_moment());
            let late = family.at(lemma.window_start)?;
            let mi = mutual_information(&late)?;
            r.diag("lemma_window_start", lemma.window_start)
                .diag("lemma_window_length", lemma.window_length)
                .diag("lemma_trace_second_moment", lemma.max_trace_second_moment())
                .diag("lemma_overlap_second_moment", lemma.max_overlap_second_moment())
                .diag("mutual_information", mi.mutual)
                .diag("object_entropy", mi.h_o)
                .verdict("decoherence_conditions_hold", worst, Comparison::Below, lemma.epsilon);
        }
        Err(Error::Size(msg)) => {
            r.note("lemma", format!("branch family not built: {msg}"));
        }
        Err(e) => return Err(e),
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_distribution(g: &[f64], up: &[f64]) -> Vec<(f64, f64)> {
        let n = g.len();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for m in 0..1usize << n {
            let mut v = 0.0;
            let mut p = 1.0;
            for k in 0..n {
                if m >> k & 1 == 0 {
                    v += g[k];
                    p *= up[k];
                } else {
                    v -= g[k];
                    p *= 1.0 - up[k];
                }
            }
            match out.iter_mut().find(|(u, _)| (u - v).abs() < 1e-9) {
                Some(e) => e.1 += p,
                None => out.push((v, p)),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    #[test]
    fn compression_matches_enumeration() {
        let g = [0.3, 0.1, 0.2, 0.1, 0.4, 0.3];
        let up = [0.5, 0.2, 0.7, 0.5, 0.9, 0.4];
        let fast = coupling_distribution(&g, &up, 1 << 10).unwrap();
        let slow = brute_force_distribution(&g, &up);
        assert_eq!(fast.len(), slow.len());
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-14);
        }
    }

    #[test]
    fn preset_has_linear_number_of_levels() {
        let s = SpinBathSpec::preset(12);
        let d = coupling_distribution(&s.effective_couplings(), &s.up_probabilities(), 2048).unwrap();
        assert_eq!(d.len(), 79);
        assert!(coupling_distribution(&SpinBathSpec::random(12, 3).effective_couplings(), &[0.5; 12], 2048).is_none());
    }

    #[test]
    fn exact_trace_matches_family() {
        let mut s = SpinBathSpec::preset(8);
        s.bath[2] = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let grid = [0.0, 1.3, 7.9];
        let exact = trace_exact(&s, (0, 1), &grid).unwrap();
        for (&t, z) in grid.iter().zip(&exact) {
            let f = spin_bath_family(&s, t).unwrap();
            assert!((f.trace(0, 1) - z).norm() < 1e-13);
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let s = SpinBathSpec::preset(10);
        let grid = [0.5, 3.0, 11.0];
        let exact = trace_exact(&s, (0, 1), &grid).unwrap();
        let mc = trace_monte_carlo(&s, (0, 1), &grid, 100_000, 7).unwrap();
        for (z, e) in exact.iter().zip(&mc) {
            assert!((z.norm() - e.mean.norm()).abs() < 3.0 * e.standard_error);
        }
    }

    #[test]
    fn monte_carlo_is_thread_independent() {
        let mut s = SpinBathSpec::preset(16);
        let a = trace_monte_carlo(&s, (0, 1), &[2.0], 10_000, 1).unwrap();
        s.exec = Exec::Sequential;
        let b = trace_monte_carlo(&s, (0, 1), &[2.0], 10_000, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_mode_refuses_large_baths() {
        let mut s = SpinBathSpec::preset(25);
        s.mode = BathMode::Exact;
        assert!(matches!(spin_bath_scenario(&s), Err(Error::Size(_))));
    }

    #[test]
    fn many_qubit_limits() {
        let s = SpinBathSpec::preset(10_000);
        let m = bath_moments(&s);
        assert!((m.weighted_spread - 3f64.sqrt().recip()).abs() < 1e-4);
        assert!((m.gap - 0.5).abs() < 1e-4);
        let (small, large) = uniform_configuration_factors(1.0, -1.0, s.coupling_span(), 1.0);
        assert!((small - (-0.25f64).exp()).abs() < 1e-4);
        assert_eq!(large, 1.0);
    }

    #[test]
    fn extended_spectrum_factors() {
        let span = 0.5;
        let (s, l) = uniform_configuration_factors(2.0, -1.0, span, 1.0);
        assert!((s - (-9.0f64 / 16.0).exp()).abs() < 1e-15);
        assert!((l - (-1.0f64 / 16.0).exp()).abs() < 1e-15);
        let (s, l) = uniform_configuration_factors(2.0, -2.0, span, 1.0);
        assert!((s - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(l, 1.0);
        let (s, l) = uniform_configuration_factors(2.0, 0.0, span, 1.0);
        assert_eq!(s, l);
        assert!((s - (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn three_qubit_bath_matches_four_spin_model() {
        let mut s = SpinBathSpec::preset(3);
        s.couplings = vec![1.0; 3];
        s.coupling_weight = 0.25;
        s.law = LawParameters { dt: 1.0, lambda: 2.0 };
        let grid = [0.0, 0.7, 2.5];
        let tr = trace_exact(&s, (0, 1), &grid).unwrap();
        for (&t, z) in grid.iter().zip(&tr) {
            let expected = 0.25 * (1.5 * t).cos() * (-9.0f64 / 32.0).exp()
                + 0.75 * (0.5 * t).cos() * (-1.0f64 / 32.0).exp();
            assert!((z.re - expected).abs() < 1e-14 && z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn scenario_is_deterministic() {
        let mut s = SpinBathSpec::preset(16);
        s.samples = 8192;
        s.seed = 7;
        let a = spin_bath_scenario(&s).unwrap();
        let b = spin_bath_scenario(&s).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn coarse_map_rows() {
        let r = spin_bath_scenario(&SpinBathSpec::extended(6)).unwrap();
        let s = r.value("coarse_pair(0,2).smallest_factor").unwrap();
        assert_eq!(s, r.value("coarse_pair(0,2).largest_factor").unwrap());
        assert!(r.value("pair(-2,2).largest_factor").unwrap() == 1.0);
    }
}
