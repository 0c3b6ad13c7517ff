//! Object/apparatus splits of the time-averaged state for separable
//! interactions `H = Σ_α |α⟩⟨α| ⊗ Σ_β h_αβ |β⟩⟨β|`.
//!
//! With `|Ψ(t)⟩ = Σ_αβ b_α d_β e^{-i t h_αβ} |α⟩|β⟩` the time average splits
//! into branch operators `ρ_αα'` on the apparatus:
//! `σ = Σ_αα' b_α b_α'* |α⟩⟨α'| ⊗ ρ_αα'`. Decoherence in the object basis
//! shows up as small traces `tr ρ_αα'` and small overlaps `‖ρ_α ρ_α'‖`.

mod branches;
mod correlation;
mod info;
mod interaction;
mod lemma;
mod tripartite;
mod uniqueness;

pub use branches::{branch_operator, evolve_branches, BranchFamily};
pub use correlation::{window_average, CorrelationAmplitude, WindowAverage};
pub use info::{
    classical_classical_distance, classical_classical_distance_min, mutual_information,
    quantum_mutual_information, MutualInformation,
};
pub use interaction::SeparableInteraction;
pub use lemma::{
    equidistributed_window, large_t0_window, lemma41_report, sample_window, Lemma41Report, LemmaConfig, PairDiagnostics,
};
pub use tripartite::{tripartite_sigma, TripartiteState};
pub use uniqueness::{
    degenerate_groups, evaluate_basis, uniqueness_scan, BasisEvaluation, UniquenessConfig,
    UniquenessReport,
};
