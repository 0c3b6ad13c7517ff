//! Position readout `H = x_O ⊗ P_A` on discretised object and apparatus
//! grids, and coherent-state pointer diagnostics.

use super::grid::GridWavepacket;
use super::report::{Comparison, ScenarioReport};
use crate::bipartite::{BranchFamily, SeparableInteraction};
use crate::error::{Error, Result};
use crate::exec::{map_range, pairwise_sum, Exec};
use crate::localtime::{fidelity_closed_form, LawParameters, Preset};
use crate::qcore::{validate_density, ComplexMatrix};
use crate::C64;
use std::f64::consts::{FRAC_PI_4, PI};

/// Fewest points accepted on a resolved grid.
pub const MIN_GRID_POINTS: usize = 64;
/// Final-to-initial ratio of the branch trace that counts as decayed.
const DECAY_RATIO: f64 = 0.01;

/// Inputs of the position-readout scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionSpec {
    /// Object wavefunction over `x`.
    pub phi: GridWavepacket,
    /// Apparatus wavefunction over `P`.
    pub chi: GridWavepacket,
    pub law: LawParameters,
    pub t0_grid: Vec<f64>,
    /// Object positions `(x, x')` whose coherence is followed over `t0`.
    pub pair: (f64, f64),
    /// Centre separation of the coherent pointer pair.
    pub coherent_separation: f64,
    pub exec: Exec,
}

impl Default for PositionSpec {
    fn default() -> Self {
        let (dt, lambda) = Preset::Position.pair();
        let packet = GridWavepacket::gaussian(128, -10.0, 10.0, 0.0, 1.0, 0.0).expect("valid packet");
        Self {
            phi: packet.clone(),
            chi: packet,
            law: LawParameters { dt, lambda },
            t0_grid: super::grid::uniform_grid(256, 0.0, 4.0),
            pair: (-1.0, 1.0),
            coherent_separation: 4.0,
            exec: Exec::Parallel,
        }
    }
}

impl PositionSpec {
    fn validate(&self) -> Result<()> {
        if self.phi.len() < MIN_GRID_POINTS {
            return Err(Error::Parameter(format!(
                "object grid needs at least {MIN_GRID_POINTS} points, got {}",
                self.phi.len()
            )));
        }
        let n = self.chi.len();
        if n != 1 && n < MIN_GRID_POINTS {
            return Err(Error::Parameter(format!(
                "apparatus grid needs one point or at least {MIN_GRID_POINTS}, got {n}"
            )));
        }
        if self.t0_grid.is_empty() || self.t0_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("readout grid must be non-empty and finite".into()));
        }
        self.law.at(0.0)?;
        Ok(())
    }
}

/// Branch family with the object grid as branches and the apparatus grid as
/// apparatus levels. Only practical for small grids.
pub fn position_family(phi: &GridWavepacket, chi: &GridWavepacket, law: &LawParameters, t0: f64) -> Result<BranchFamily> {
    let (x, p) = (phi.points(), chi.points());
    let h = SeparableInteraction::from_fn(x.len(), p.len(), |i, j| x[i] * p[j])?;
    BranchFamily::new(h, phi.amplitudes().to_vec(), chi.amplitudes().to_vec(), law.at(t0)?)
}

/// `Σ_P |χ(P)|² e^{-i t0 Δx P} e^{-(Δx P)² / 4λ}`: the apparatus trace of
/// the `(x, x')` block divided by `φ(x) φ*(x')`.
pub fn branch_trace(chi: &GridWavepacket, dx: f64, t0: f64, lambda: f64) -> C64 {
    let terms: Vec<C64> = chi
        .points()
        .iter()
        .zip(chi.amplitudes())
        .map(|(&p, a)| {
            let w = dx * p;
            C64::from_polar(a.norm_sqr() * (-w * w / (4.0 * lambda)).exp(), -t0 * w)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Continuum value of [`branch_trace`] for a centred Gaussian momentum
/// density of spread `spread`:
/// `(1 + Δx² s² / 2λ)^{-1/2} exp(-t0² Δx² s² / 2(1 + Δx² s² / 2λ))`.
pub fn gaussian_branch_trace(dx: f64, t0: f64, spread: f64, lambda: f64) -> f64 {
    let k = 1.0 + dx * dx * spread * spread / (2.0 * lambda);
    (-(t0 * dx * spread).powi(2) / (2.0 * k)).exp() / k.sqrt()
}

/// Reduced object state `ρ_O(x, x') = φ(x) φ*(x') Σ_P |χ(P)|² e^{...}` at
/// readout centre `t0`.
pub fn object_state(phi: &GridWavepacket, chi: &GridWavepacket, lambda: f64, t0: f64, exec: Exec) -> ComplexMatrix {
    let (x, a) = (phi.points(), phi.amplitudes());
    let n = x.len();
    let rows = map_range(exec, n, |i| {
        (0..n)
            .map(|j| a[i] * a[j].conj() * branch_trace(chi, x[i] - x[j], t0, lambda))
            .collect::<Vec<_>>()
    });
    ComplexMatrix::new(n, n, rows.into_iter().flatten().collect()).expect("square by construction")
}

/// Minimum-uncertainty packet `(πs²)^{-1/4} exp(-(x - c)² / 2s² + i x p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentPacket {
    pub center: f64,
    pub spread: f64,
    pub momentum: f64,
}

impl CoherentPacket {
    pub fn new(center: f64, spread: f64, momentum: f64) -> Self {
        Self {
            center,
            spread,
            momentum,
        }
    }

    pub fn at(&self, x: f64) -> C64 {
        let s = self.spread;
        let norm = (PI * s * s).powf(-0.25);
        C64::from_polar(norm * (-(x - self.center).powi(2) / (2.0 * s * s)).exp(), x * self.momentum)
    }
}

/// `I_n = ∫ x^n exp(-(x - x0)² / 2σ² - i x Δp) dx`, from the moments of a
/// normal law with complex mean `x0 - i σ² Δp`.
pub fn gaussian_moment_integral(n: usize, x0: f64, sigma: f64, dp: f64) -> C64 {
    let mu = C64::new(x0, -sigma * sigma * dp);
    let var = sigma * sigma;
    let (mut prev, mut cur) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    for k in 1..=n {
        let next = mu * cur + prev * ((k - 1) as f64 * var);
        prev = cur;
        cur = next;
    }
    let pref = (2.0 * PI).sqrt() * sigma;
    cur * C64::from_polar(pref * (-var * dp * dp / 2.0).exp(), -x0 * dp)
}

/// `⟨ψ|x^n|ψ'⟩` for two coherent packets.
pub fn coherent_matrix_element(a: &CoherentPacket, b: &CoherentPacket, n: usize) -> C64 {
    let (s1, s2) = (a.spread * a.spread, b.spread * b.spread);
    let sigma = (s1 * s2 / (s1 + s2)).sqrt();
    let x0 = (b.center * s1 + a.center * s2) / (s1 + s2);
    let norm = (PI * PI * s1 * s2).powf(-0.25);
    let envelope = (-(a.center - b.center).powi(2) / (2.0 * (s1 + s2))).exp();
    gaussian_moment_integral(n, x0, sigma, a.momentum - b.momentum) * (norm * envelope)
}

/// Largest `t0` step allowed by the fastest phase `max|xP|`.
fn check_resolution(spec: &PositionSpec, dx: f64) -> Result<()> {
    let xmax = spec.phi.points().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let pmax = spec.chi.points().iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let step = spec.t0_grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    if xmax * pmax * step > PI {
        return Err(Error::Resolution(format!(
            "readout step {step} aliases the fastest phase {}",
            xmax * pmax
        )));
    }
    let tmax = spec.t0_grid.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if tmax * dx.abs() * spec.chi.spacing() >= PI {
        return Err(Error::Resolution(format!(
            "readout time {tmax} reaches the recurrence of the momentum grid"
        )));
    }
    Ok(())
}

/// Position readout with a Gaussian time law.
pub fn position_scenario(spec: &PositionSpec) -> Result<ScenarioReport> {
    spec.validate()?;
    let lambda = spec.law.lambda;
    let (phi, chi) = (&spec.phi, &spec.chi);
    let (i, j) = (phi.nearest(spec.pair.0), phi.nearest(spec.pair.1));
    let (x, xp) = (phi.points()[i], phi.points()[j]);
    let dx = x - xp;
    check_resolution(spec, dx)?;

    let published = *spec == PositionSpec::default();
    let paper = |v: f64| published.then_some(v);
    let mut r = ScenarioReport::new("position");
    r.param("lambda", lambda)
        .param("dt", spec.law.dt)
        .param("x_points", phi.len())
        .param("p_points", chi.len())
        .param("x_min", phi.points()[0])
        .param("x_max", *phi.points().last().expect("non-empty"))
        .param("p_min", chi.points()[0])
        .param("p_max", *chi.points().last().expect("non-empty"))
        .param("sigma_x", phi.sigma())
        .param("sigma_p", chi.sigma())
        .param("pair_x", x)
        .param("pair_x_prime", xp)
        .param("coherent_separation", spec.coherent_separation)
        .param("t0_count", spec.t0_grid.len())
        .param("t0_start", spec.t0_grid[0])
        .param("t0_stop", *spec.t0_grid.last().expect("non-empty"));

    r.factor("gaussian_denominator", 4.0 * lambda, paper(12.0));
    r.note("gaussian_denominator", "factor exp(-(xP - x'P')^2 / 4 lambda)");

    // ΔH for independent x and P.
    let (mx, mp) = (phi.mean(), chi.mean());
    let (vx, vp) = (phi.std().powi(2), chi.std().powi(2));
    let spread = ((vx + mx * mx) * (vp + mp * mp) - (mx * mp).powi(2)).max(0.0).sqrt();
    r.diag("delta_h", spread)
        .diag_ref("tau_min_half", FRAC_PI_4, paper(FRAC_PI_4))
        .diag("window_mass", spec.law.at(0.0)?.window_mass())
        .verdict("window_inside_time_bound", spec.law.dt, Comparison::Below, FRAC_PI_4);
    if spread > 0.0 {
        r.diag("tau_min_half_spread", PI / (4.0 * spread));
    }
    r.note(
        "tau_min_half",
        "taken as given: the ground-energy branch is asserted for a large box, not derived from the grid",
    );

    let levels: Vec<f64> = phi.points().iter().flat_map(|&x| chi.points().iter().map(move |&p| x * p)).collect();
    let weights: Vec<f64> = phi
        .probabilities()
        .iter()
        .flat_map(|&w| chi.probabilities().into_iter().map(move |v| w * v))
        .collect();
    r.diag("fidelity", fidelity_closed_form(&levels, &weights, lambda, spec.exec));

    let traces: Vec<C64> = spec.t0_grid.iter().map(|&t| branch_trace(chi, dx, t, lambda)).collect();
    let centred = mp.abs() < 1e-12;
    let mut continuum_dev: f64 = 0.0;
    for (k, (&t, z)) in spec.t0_grid.iter().zip(&traces).enumerate() {
        r.diag(&format!("branch_trace[{k}]"), z.norm());
        if centred {
            continuum_dev = continuum_dev.max((z - gaussian_branch_trace(dx, t, chi.std(), lambda)).norm());
        }
    }
    if centred && chi.len() > 1 {
        r.diag("branch_trace_continuum_deviation", continuum_dev);
    }
    let first = traces[0].norm();
    let last = traces[traces.len() - 1].norm();
    if first > 0.0 {
        r.verdict("branch_trace_decays", last / first, Comparison::Below, DECAY_RATIO);
    }

    let t_end = *spec.t0_grid.last().expect("non-empty");
    let rho = object_state(phi, chi, lambda, t_end, spec.exec);
    let diag_err = (0..phi.len())
        .map(|k| (rho[(k, k)].re - phi.probabilities()[k]).abs())
        .fold(0.0, f64::max);
    let rho = validate_density(&rho)?;
    r.diag("object_diagonal_max_error", diag_err)
        .diag("object_purity", rho.purity());

    let a = CoherentPacket::new(0.0, 1.0, 0.0);
    let b = CoherentPacket::new(spec.coherent_separation, 1.0, 0.0);
    let overlap = coherent_matrix_element(&a, &b, 0).norm();
    let on_grid: C64 = pairwise_sum(
        &phi.points()
            .iter()
            .map(|&x| a.at(x).conj() * b.at(x) * phi.spacing())
            .collect::<Vec<_>>(),
    );
    let s = spec.coherent_separation;
    r.diag_ref("coherent_overlap", overlap, paper((-s * s / 4.0).exp()))
        .diag("coherent_overlap_grid", on_grid.norm())
        .diag(
            "coherent_mean_position",
            (coherent_matrix_element(&a, &b, 1) / coherent_matrix_element(&a, &b, 0)).re,
        );
    r.note("coherent_overlap", "unit-spread packets: exp(-(x_i - x_j)^2 / 4)");
    Ok(r)
}
