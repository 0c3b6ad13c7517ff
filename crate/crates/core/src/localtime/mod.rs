//! Readout-time uncertainty: the Gaussian time law, the energy-time bound and
//! the locally time-averaged state `σ`.

mod bound;
mod ensemble;
mod law;
mod quadrature;
mod sigma;
mod spectral;

pub use bound::{
    select_parameters, time_bound, BoundBranch, LawParameters, ParameterChoice, ParameterPolicy,
    Preset, TimeBound,
};
pub use ensemble::{apply_dynamical_map, coarse_time_mixture, EnsembleState};
pub use law::{coherence_factor, gaussian_density, window_mass, GaussianTimeLaw};
pub use quadrature::{gauss_legendre, sigma_quadrature, QuadratureConfig, QuadratureRule};
pub use sigma::{
    energy_expectation, fidelity_closed_form, gaussian_pair_sum, purity, purity_with,
    sigma_analytic, sigma_analytic_with, ExponentForm,
};
pub use spectral::SpectralSystem;
