//! A spin-1/2 object coupled through `S_1z` to one or three spin-1/2
//! apparatus qubits.

use super::report::{Comparison, ScenarioReport};
use crate::bipartite::{
    equidistributed_window, evolve_branches, large_t0_window, lemma41_report, mutual_information, sample_window,
    BranchFamily, LemmaConfig, SeparableInteraction,
};
use crate::error::{Error, Result};
use crate::localtime::{
    coherence_factor, fidelity_closed_form, time_bound, LawParameters, Preset,
};
use crate::qcore::fidelity_pure;
use crate::exec::Exec;
use crate::C64;
use std::f64::consts::PI;

const SPIN: [f64; 2] = [0.5, -0.5];
/// Largest deficit `1 - F` accepted as "σ ≈ |Ψ⟩⟨Ψ|" for two qubits.
const TWO_QUBIT_DEFICIT_BOUND: f64 = 0.062;

fn half() -> C64 {
    C64::new(0.5f64.sqrt(), 0.0)
}

/// Inputs of the two-qubit scenario: `H = C S_1z S_2z`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitSpec {
    pub coupling: f64,
    pub object: [C64; 2],
    pub apparatus: [C64; 2],
    pub law: LawParameters,
    /// Readout centre used for the fidelity and the product entry.
    pub t0: f64,
    pub t0_grid: Vec<f64>,
}

impl Default for TwoQubitSpec {
    fn default() -> Self {
        let (dt, lambda) = Preset::TwoQubit.pair();
        Self {
            coupling: 1.0,
            object: [half(); 2],
            apparatus: [half(); 2],
            law: LawParameters { dt, lambda },
            t0: 0.0,
            t0_grid: sample_window(0.0, 4.0 * PI, 64),
        }
    }
}

impl TwoQubitSpec {
    fn is_published(&self) -> bool {
        let d = Self::default();
        self.coupling == d.coupling && self.law == d.law && self.apparatus == d.apparatus
    }
}

/// Inputs of the four-qubit scenario: `H = S_1z (S_2z + S_3z + S_4z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourQubitSpec {
    pub object: [C64; 2],
    /// Per-qubit `(a_k, b_k)` of the three apparatus spins.
    pub bath: [[C64; 2]; 3],
    pub law: LawParameters,
    pub t0: f64,
    pub t0_grid: Vec<f64>,
}

impl Default for FourQubitSpec {
    fn default() -> Self {
        let (dt, lambda) = Preset::FourQubit.pair();
        Self {
            object: [half(); 2],
            bath: [[half(); 2]; 3],
            law: LawParameters { dt, lambda },
            t0: 0.0,
            t0_grid: sample_window(0.0, 8.0 * PI, 20),
        }
    }
}

impl FourQubitSpec {
    fn is_published(&self) -> bool {
        let d = Self::default();
        self.law == d.law && self.bath == d.bath
    }
}

/// Two-qubit branch family at readout centre `t0`.
pub fn two_qubit_family(spec: &TwoQubitSpec, t0: f64) -> Result<BranchFamily> {
    if spec.coupling == 0.0 || !spec.coupling.is_finite() {
        return Err(Error::Parameter("coupling must be non-zero and finite".into()));
    }
    let c = spec.coupling;
    let h = SeparableInteraction::from_fn(2, 2, |a, b| c * SPIN[a] * SPIN[b])?;
    BranchFamily::new(h, spec.object.to_vec(), spec.apparatus.to_vec(), spec.law.at(t0)?)
}

/// Apparatus basis `|m_2 n_3 p_4⟩`, `+` before `-`, first qubit slowest.
fn three_spin_configs() -> Vec<[usize; 3]> {
    (0..8).map(|i| [i >> 2 & 1, i >> 1 & 1, i & 1]).collect()
}

/// Four-qubit branch family at readout centre `t0`.
pub fn four_qubit_family(spec: &FourQubitSpec, t0: f64) -> Result<BranchFamily> {
    let configs = three_spin_configs();
    let total: Vec<f64> = configs.iter().map(|c| c.iter().map(|&s| SPIN[s]).sum()).collect();
    let h = SeparableInteraction::from_fn(2, 8, |a, b| SPIN[a] * total[b])?;
    let d = configs
        .iter()
        .map(|c| (0..3).map(|k| spec.bath[k][c[k]]).product())
        .collect();
    BranchFamily::new(h, spec.object.to_vec(), d, spec.law.at(t0)?)
}

/// Distinct non-zero level spacings `|h_n - h_m|` over populated levels.
fn spacings(family: &BranchFamily) -> Vec<f64> {
    let h = family.interaction();
    let mut levels = Vec::new();
    for a in family.populated() {
        for (b, d) in family.d().iter().enumerate() {
            if d.norm_sqr() > 0.0 {
                levels.push(h.level(a, b));
            }
        }
    }
    let mut gaps: Vec<f64> = Vec::new();
    for (i, x) in levels.iter().enumerate() {
        for y in &levels[i + 1..] {
            let g = (x - y).abs();
            if g > 1e-12 && !gaps.iter().any(|z| (z - g).abs() < 1e-12) {
                gaps.push(g);
            }
        }
    }
    gaps.sort_by(f64::total_cmp);
    gaps
}

fn product_weights(family: &BranchFamily) -> (Vec<f64>, Vec<f64>) {
    let mut levels = Vec::new();
    let mut weights = Vec::new();
    for a in 0..family.dim_o() {
        for b in 0..family.dim_a() {
            levels.push(family.interaction().level(a, b));
            weights.push(family.b()[a].norm_sqr() * family.d()[b].norm_sqr());
        }
    }
    (levels, weights)
}

/// Rows shared by both qubit scenarios. Returns the fidelity.
fn common_rows(
    report: &mut ScenarioReport,
    family: &BranchFamily,
    t0_grid: &[f64],
    closed_trace: impl Fn(f64) -> C64,
) -> Result<f64> {
    let law = family.law();
    let sigma = family.assemble_sigma()?;
    let psi = evolve_branches(family.interaction(), family.b(), family.d(), law.t0())?;
    let fidelity = fidelity_pure(&sigma, &psi)?;
    let (levels, weights) = product_weights(family);
    report
        .diag("fidelity", fidelity)
        .diag(
            "fidelity_closed_form",
            fidelity_closed_form(&levels, &weights, law.lambda(), Exec::Sequential),
        )
        .diag("purity", sigma.purity())
        .diag("window_mass", law.window_mass());

    let mut max_err: f64 = 0.0;
    for (k, &t) in t0_grid.iter().enumerate() {
        let tr = family.at(t)?.trace(0, 1);
        max_err = max_err.max((tr - closed_trace(t)).norm());
        report
            .diag(&format!("trace_trajectory[{k}].re"), tr.re)
            .diag(&format!("trace_trajectory[{k}].im"), tr.im);
    }
    report.diag("trace_trajectory_max_error", max_err);

    let mi = mutual_information(family)?;
    report.diag("mutual_information", mi.mutual).diag("object_entropy", mi.h_o);

    let (start, len) = large_t0_window(family, 50.0)?;
    let lemma = lemma41_report(family, &equidistributed_window(start, len, 16), &LemmaConfig::default())?;
    let worst = lemma.max_trace_second_moment().max(lemma.max_overlap_second_moment());
    report
        .diag("lemma_window_start", lemma.window_start)
        .diag("lemma_window_length", lemma.window_length)
        .diag("lemma_trace_second_moment", lemma.max_trace_second_moment())
        .diag("lemma_overlap_second_moment", lemma.max_overlap_second_moment())
        .verdict("decoherence_conditions_hold", worst, Comparison::Below, lemma.epsilon);
    Ok(fidelity)
}

fn grid_params(report: &mut ScenarioReport, law: &LawParameters, t0: f64, grid: &[f64]) {
    report
        .param("lambda", law.lambda)
        .param("dt", law.dt)
        .param("t0", t0)
        .param("t0_count", grid.len());
    if let (Some(a), Some(b)) = (grid.first(), grid.last()) {
        report.param("t0_start", *a).param("t0_stop", *b);
    }
}

/// Two spin-1/2 particles, `H = C S_1z S_2z`.
pub fn two_qubit_scenario(spec: &TwoQubitSpec) -> Result<ScenarioReport> {
    let family = two_qubit_family(spec, spec.t0)?;
    let published = spec.is_published();
    let paper = |v: f64| published.then_some(v);
    let (c, lambda) = (spec.coupling, spec.law.lambda);
    let mut r = ScenarioReport::new("two_qubit");
    r.param("coupling", c);
    grid_params(&mut r, &spec.law, spec.t0, &spec.t0_grid);

    let factor = coherence_factor(c / 2.0, lambda);
    r.factor("coherence_factor", factor, paper(0.939));
    r.note(
        "coherence_factor",
        "exp(-C^2/16 lambda); the only non-trivial level spacing is C/2",
    );

    let [dp, dm] = [spec.apparatus[0].norm_sqr(), spec.apparatus[1].norm_sqr()];
    let closed_trace = |t: f64| {
        (C64::from_polar(dp, -t * c / 2.0) + C64::from_polar(dm, t * c / 2.0)) * factor
    };
    let fidelity = common_rows(&mut r, &family, &spec.t0_grid, closed_trace)?;
    let deficit = 1.0 - fidelity;
    r.diag_ref("fidelity_deficit", deficit, paper(TWO_QUBIT_DEFICIT_BOUND))
        .diag("coherence_loss", 1.0 - factor)
        .verdict(
            "fidelity_deficit_within_bound",
            deficit,
            Comparison::AtMost,
            TWO_QUBIT_DEFICIT_BOUND,
        );

    // (ρ_+ ρ_-)_{++} against its closed form.
    let t0 = spec.t0;
    let prod = family.rho(0).matrix().dot(family.rho(1).matrix())[(0, 0)];
    let closed = C64::from_polar(dp, -t0 * c / 2.0)
        * (C64::from_polar(dp, t0 * c / 2.0)
            + C64::from_polar(dm * (-c * c / (8.0 * lambda)).exp(), -t0 * c / 2.0));
    r.diag("product_entry.re", prod.re)
        .diag("product_entry.im", prod.im)
        .diag("product_entry_closed_form_error", (prod - closed).norm());

    let bound = family_bound(&family)?;
    r.diag_ref("tau_min_half", bound.tau_min / 2.0, paper(PI))
        .verdict("window_inside_time_bound", 2.0 * spec.law.dt, Comparison::Below, bound.tau_min);
    Ok(r)
}

fn family_bound(family: &BranchFamily) -> Result<crate::localtime::TimeBound> {
    let (levels, weights) = product_weights(family);
    time_bound(&levels, &weights)
}

/// Four spin-1/2 particles, `H = S_1z (S_2z + S_3z + S_4z)`.
pub fn four_qubit_scenario(spec: &FourQubitSpec) -> Result<ScenarioReport> {
    let family = four_qubit_family(spec, spec.t0)?;
    let published = spec.is_published();
    let paper = |v: f64| published.then_some(v);
    let lambda = spec.law.lambda;
    let mut r = ScenarioReport::new("four_qubit");
    grid_params(&mut r, &spec.law, spec.t0, &spec.t0_grid);

    let gaps = spacings(&family);
    let smallest = coherence_factor(*gaps.last().expect("non-trivial spectrum"), lambda);
    let largest = coherence_factor(gaps[0], lambda);
    r.factor("smallest_factor", smallest, paper(0.755))
        .factor("largest_factor", largest, paper(0.969));

    // tr ρ_{+-} = Σ_S P(S) e^{-i t0 S} e^{-S²/4λ}, S the apparatus total spin.
    let configs = three_spin_configs();
    let totals: Vec<f64> = configs.iter().map(|c| c.iter().map(|&s| SPIN[s]).sum()).collect();
    let probs: Vec<f64> = family.d().iter().map(|d| d.norm_sqr()).collect();
    let closed_trace = |t: f64| -> C64 {
        totals
            .iter()
            .zip(&probs)
            .map(|(&s, &p)| C64::from_polar(p * coherence_factor(s, lambda), -t * s))
            .sum()
    };
    let fidelity = common_rows(&mut r, &family, &spec.t0_grid, closed_trace)?;
    let (lo, hi) = (smallest.sqrt(), largest.sqrt());
    r.diag_ref("fidelity_lower_bound", lo, paper(0.869))
        .diag_ref("fidelity_upper_bound", hi, paper(0.984));
    r.diagnostics
        .iter_mut()
        .find(|q| q.label == "fidelity")
        .expect("fidelity row")
        .paper_value = paper(0.894);
    r.verdict("fidelity_above_lower_bound", fidelity, Comparison::Above, lo)
        .verdict("fidelity_below_upper_bound", fidelity, Comparison::Below, hi);
    r.note(
        "fidelity",
        "sqrt(sum_nm w_n w_m exp(-(h_n-h_m)^2/4 lambda)); the published 0.894 equals \
         sum_nm w_n w_m exp(-|h_n-h_m|/2 lambda) without the square root",
    );

    // (ρ_+ ρ_-)_{11} for the all-up apparatus state.
    let t0 = spec.t0;
    let prod = family.rho(0).matrix().dot(family.rho(1).matrix())[(0, 0)];
    let s1 = totals[0];
    let inner: C64 = totals
        .iter()
        .zip(&probs)
        .map(|(&s, &p)| {
            let damp = (-2.0 * (0.5 * (s1 - s)).powi(2) / (4.0 * lambda)).exp();
            C64::from_polar(p * damp, t0 * s)
        })
        .sum();
    let closed = C64::from_polar(probs[0], -t0 * s1) * inner;
    r.diag("product_entry.re", prod.re)
        .diag("product_entry.im", prod.im)
        .diag("product_entry_closed_form_error", (prod - closed).norm());

    let bound = family_bound(&family)?;
    r.diag("tau_min_half", bound.tau_min / 2.0)
        .diag_ref("tau_min_half_gap_branch", bound.gap_term() / 2.0, paper(PI / 3.0))
        .diag("delta_h", bound.delta_h)
        .diag("ground_gap", bound.gap);
    r.note(
        "tau_min_half",
        "max of both branches; the published pi/3 is the ground-gap branch alone",
    );
    Ok(r)
}
