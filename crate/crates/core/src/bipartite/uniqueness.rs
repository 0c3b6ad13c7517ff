use super::BranchFamily;
use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::qcore::ComplexMatrix;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessConfig {
    /// Grid points per mixing angle; `θ` uses `grid - 1` interior points of
    /// `(0, π/2)` and `φ` uses `grid` points of `[0, 2π)`.
    pub grid: usize,
    pub epsilon: f64,
    /// Fraction of sampled `t0` on which the product condition must hold.
    pub required_fraction: f64,
    /// Branch weights closer than this are treated as degenerate.
    pub degeneracy_tol: f64,
    pub exec: Exec,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        Self {
            grid: 12,
            epsilon: 0.05,
            required_fraction: 0.9,
            degeneracy_tol: 1e-9,
            exec: Exec::Parallel,
        }
    }
}

/// The two decoherence conditions evaluated in one object basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEvaluation {
    /// Mixed pair of original branches, `None` for the original basis.
    pub pair: Option<(usize, usize)>,
    pub theta: f64,
    pub phi: f64,
    /// `max_{ν≠ν'} |Σ_α |b_α|² ⟨ν|α⟩⟨α|ν'⟩|`, independent of `t0`.
    pub condition_t: f64,
    /// `max_{ν≠ν'} |tr R_νν'|` at each sampled `t0`.
    pub full_trace: Vec<f64>,
    /// `max_{ν≠ν'} ‖R_νν R_ν'ν'‖_F` at each sampled `t0`.
    pub condition_p: Vec<f64>,
    pub condition_p_median: f64,
    pub fraction_p_below: f64,
    pub passes_t: bool,
    pub passes_p: bool,
}

impl BasisEvaluation {
    pub fn passes(&self) -> bool {
        self.passes_t && self.passes_p
    }

    fn score(&self) -> f64 {
        self.condition_t.max(self.condition_p_median)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub degenerate_groups: Vec<Vec<usize>>,
    pub original: BasisEvaluation,
    pub alternatives: Vec<BasisEvaluation>,
    /// Index into `alternatives` of the basis closest to passing.
    pub best_alternative: Option<usize>,
    pub any_alternative_passes: bool,
    /// Original basis passes and no alternative does.
    pub unique: bool,
    pub epsilon: f64,
    pub required_fraction: f64,
}

impl UniquenessReport {
    pub fn best(&self) -> Option<&BasisEvaluation> {
        self.best_alternative.map(|i| &self.alternatives[i])
    }
}

/// Groups of populated branches whose weights `|b_α|²` coincide.
pub fn degenerate_groups(b: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (a, amp) in b.iter().enumerate() {
        let w = amp.norm_sqr();
        if w <= 1e-15 {
            continue;
        }
        match groups.iter_mut().find(|g| (b[g[0]].norm_sqr() - w).abs() <= tol) {
            Some(g) => g.push(a),
            None => groups.push(vec![a]),
        }
    }
    groups.retain(|g| g.len() > 1);
    groups
}

/// Basis equal to the original except in the plane of `i` and `j`:
/// `|ν_i⟩ = cos θ |i⟩ + e^{iφ} sin θ |j⟩`,
/// `|ν_j⟩ = -e^{-iφ} sin θ |i⟩ + cos θ |j⟩`. Columns are the basis vectors.
fn mixing_basis(dim: usize, i: usize, j: usize, theta: f64, phi: f64) -> ComplexMatrix {
    let mut v = ComplexMatrix::identity(dim);
    let (s, c) = theta.sin_cos();
    v[(i, i)] = C64::new(c, 0.0);
    v[(j, i)] = C64::from_polar(s, phi);
    v[(i, j)] = -C64::from_polar(s, -phi);
    v[(j, j)] = C64::new(c, 0.0);
    v
}

/// `R_νν' = Σ_αα' b_α b_α'* ⟨ν|α⟩⟨α'|ν'⟩ ρ_αα'`.
fn r_block(family: &BranchFamily, basis: &ComplexMatrix, nu: usize, nu_p: usize) -> ComplexMatrix {
    let k = family.dim_a();
    let b = family.b();
    let mut r = ComplexMatrix::zeros(k, k);
    for a in family.populated() {
        let ca = basis[(a, nu)].conj();
        if ca.norm_sqr() == 0.0 {
            continue;
        }
        for ap in family.populated() {
            let cap = basis[(ap, nu_p)];
            if cap.norm_sqr() == 0.0 {
                continue;
            }
            r.add_scaled(&family.operator(a, ap), b[a] * b[ap].conj() * ca * cap);
        }
    }
    r
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn evaluate(
    families: &[BranchFamily],
    basis: &ComplexMatrix,
    pair: Option<(usize, usize)>,
    theta: f64,
    phi: f64,
    cfg: &UniquenessConfig,
) -> BasisEvaluation {
    let first = &families[0];
    let m = first.dim_o();
    let b = first.b();
    let mut condition_t: f64 = 0.0;
    for nu in 0..m {
        for nu_p in 0..m {
            if nu == nu_p {
                continue;
            }
            let pinch: C64 = (0..m)
                .map(|a| basis[(a, nu)].conj() * basis[(a, nu_p)] * b[a].norm_sqr())
                .sum();
            condition_t = condition_t.max(pinch.norm());
        }
    }
    let mut full_trace = Vec::with_capacity(families.len());
    let mut condition_p = Vec::with_capacity(families.len());
    for fam in families {
        let diag: Vec<ComplexMatrix> = (0..m).map(|nu| r_block(fam, basis, nu, nu)).collect();
        let (mut tr_max, mut p_max) = (0.0f64, 0.0f64);
        for nu in 0..m {
            for nu_p in 0..m {
                if nu == nu_p {
                    continue;
                }
                tr_max = tr_max.max(r_block(fam, basis, nu, nu_p).trace().norm());
                p_max = p_max.max(diag[nu].dot(&diag[nu_p]).frobenius_norm());
            }
        }
        full_trace.push(tr_max);
        condition_p.push(p_max);
    }
    let below = condition_p.iter().filter(|&&x| x < cfg.epsilon).count();
    let fraction_p_below = below as f64 / condition_p.len() as f64;
    BasisEvaluation {
        pair,
        theta,
        phi,
        condition_t,
        condition_p_median: median(&condition_p),
        full_trace,
        condition_p,
        fraction_p_below,
        passes_t: condition_t < cfg.epsilon,
        passes_p: fraction_p_below >= cfg.required_fraction,
    }
}

fn families_at(family: &BranchFamily, t0_samples: &[f64]) -> Result<Vec<BranchFamily>> {
    if t0_samples.is_empty() {
        return Err(Error::Parameter("no readout times to scan".into()));
    }
    t0_samples.iter().map(|&t| family.at(t)).collect()
}

/// Evaluates the basis obtained by mixing branches `i` and `j`.
pub fn evaluate_basis(
    family: &BranchFamily,
    pair: (usize, usize),
    theta: f64,
    phi: f64,
    t0_samples: &[f64],
    cfg: &UniquenessConfig,
) -> Result<BasisEvaluation> {
    let m = family.dim_o();
    if pair.0 >= m || pair.1 >= m || pair.0 == pair.1 {
        return Err(Error::Parameter(format!("invalid branch pair {pair:?}")));
    }
    let families = families_at(family, t0_samples)?;
    let basis = mixing_basis(m, pair.0, pair.1, theta, phi);
    Ok(evaluate(&families, &basis, Some(pair), theta, phi, cfg))
}

/// Scans bases that mix branches of equal weight and reports whether the
/// original branch basis is the only one satisfying both conditions.
pub fn uniqueness_scan(
    family: &BranchFamily,
    t0_samples: &[f64],
    cfg: &UniquenessConfig,
) -> Result<UniquenessReport> {
    if cfg.grid < 2 {
        return Err(Error::Parameter("angle grid needs at least 2 points".into()));
    }
    let families = families_at(family, t0_samples)?;
    let m = family.dim_o();
    let groups = degenerate_groups(family.b(), cfg.degeneracy_tol);
    let original = evaluate(&families, &ComplexMatrix::identity(m), None, 0.0, 0.0, cfg);

    let mut specs = Vec::new();
    for g in &groups {
        for (x, &i) in g.iter().enumerate() {
            for &j in &g[x + 1..] {
                for k in 1..cfg.grid {
                    let theta = k as f64 * PI / (2.0 * cfg.grid as f64);
                    for l in 0..cfg.grid {
                        let phi = l as f64 * 2.0 * PI / cfg.grid as f64;
                        specs.push((i, j, theta, phi));
                    }
                }
            }
        }
    }
    let alternatives = map_range(cfg.exec, specs.len(), |s| {
        let (i, j, theta, phi) = specs[s];
        let basis = mixing_basis(m, i, j, theta, phi);
        evaluate(&families, &basis, Some((i, j)), theta, phi, cfg)
    });
    let best_alternative = alternatives
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.score().total_cmp(&b.1.score()))
        .map(|(i, _)| i);
    let any_alternative_passes = alternatives.iter().any(BasisEvaluation::passes);
    Ok(UniquenessReport {
        degenerate_groups: groups,
        unique: original.passes() && !any_alternative_passes,
        original,
        alternatives,
        best_alternative,
        any_alternative_passes,
        epsilon: cfg.epsilon,
        required_fraction: cfg.required_fraction,
    })
}
