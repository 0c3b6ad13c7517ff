use super::{GaussianTimeLaw, SpectralSystem};
use crate::error::{Error, Result};
use crate::exec::{map_range, pairwise_sum, Exec};
use crate::qcore::{ComplexMatrix, DensityMatrix};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pnm1) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite Gauss–Legendre with 16-point panels.
    #[default]
    GaussLegendre,
    Trapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Nodes inside the window `[t0 - Δt, t0 + Δt]`.
    pub nodes: usize,
    pub rule: QuadratureRule,
    /// Also integrate the law outside the window, out to `sqrt(45/λ)`.
    pub tail_correction: bool,
    pub exec: Exec,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 1024,
            rule: QuadratureRule::GaussLegendre,
            tail_correction: true,
            exec: Exec::Parallel,
        }
    }
}

const PANEL: usize = 16;
/// Largest phase advance `bandwidth × Δt / nodes` the window grid accepts.
const MAX_PHASE_PER_NODE: f64 = 0.5;
/// Tails stop where the law has fallen to `e^{-45}` of its peak.
const TAIL_EXPONENT: f64 = 45.0;
/// Largest phase advance across one tail panel.
const TAIL_PHASE_PER_PANEL: f64 = 4.0;
const NODES_PER_BLOCK: usize = 128;

/// Appends a composite rule on `[a, b]` with `panels` panels.
fn push_interval(
    out: &mut Vec<(f64, f64)>,
    a: f64,
    b: f64,
    panels: usize,
    rule: QuadratureRule,
    gl: &(Vec<f64>, Vec<f64>),
) {
    match rule {
        QuadratureRule::GaussLegendre => {
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let mid = a + (p as f64 + 0.5) * h;
                for (x, w) in gl.0.iter().zip(&gl.1) {
                    out.push((mid + 0.5 * h * x, 0.5 * h * w));
                }
            }
        }
        QuadratureRule::Trapezoid => {
            let n = panels * PANEL;
            let h = (b - a) / n as f64;
            for k in 0..=n {
                let w = if k == 0 || k == n { 0.5 * h } else { h };
                out.push((a + k as f64 * h, w));
            }
        }
    }
}

/// `σ` by direct numerical integration of `ρ(t) |Ψ(t)⟩⟨Ψ(t)|`.
///
/// Serves as the independent oracle for the closed form. Without tail
/// correction the window integral is divided by its own mass; with it, the
/// result is the full-line average.
pub fn sigma_quadrature(
    sys: &SpectralSystem,
    law: &GaussianTimeLaw,
    cfg: &QuadratureConfig,
) -> Result<DensityMatrix> {
    if cfg.nodes < PANEL {
        return Err(Error::Parameter(format!(
            "quadrature needs at least {PANEL} nodes, got {}",
            cfg.nodes
        )));
    }
    let bandwidth = sys.bandwidth();
    let phase = bandwidth * law.dt() / cfg.nodes as f64;
    if phase > MAX_PHASE_PER_NODE {
        return Err(Error::Resolution(format!(
            "bandwidth {bandwidth:.4} with half-window {:.4} needs more than {} nodes",
            law.dt(),
            cfg.nodes
        )));
    }
    let gl = gauss_legendre(PANEL);
    let (t0, dt) = (law.t0(), law.dt());
    let mut points = Vec::new();
    push_interval(&mut points, t0 - dt, t0 + dt, cfg.nodes.div_ceil(PANEL), cfg.rule, &gl);
    let reach = (TAIL_EXPONENT / law.lambda()).sqrt();
    if cfg.tail_correction && reach > dt {
        let len = reach - dt;
        let panels = ((bandwidth * len / TAIL_PHASE_PER_PANEL).ceil() as usize).max(8);
        push_interval(&mut points, t0 - reach, t0 - dt, panels, cfg.rule, &gl);
        push_interval(&mut points, t0 + dt, t0 + reach, panels, cfg.rule, &gl);
    }
    let weighted: Vec<(f64, f64)> = points
        .iter()
        .map(|&(t, w)| (t, w * law.density(t)))
        .collect();
    let mass = pairwise_sum(&weighted.iter().map(|p| p.1).collect::<Vec<_>>());

    let dim = sys.dim();
    let blocks = weighted.len().div_ceil(NODES_PER_BLOCK);
    let partials = map_range(cfg.exec, blocks, |b| {
        let lo = b * NODES_PER_BLOCK;
        let hi = (lo + NODES_PER_BLOCK).min(weighted.len());
        accumulate(sys, &weighted[lo..hi])
    });
    let mut total = ComplexMatrix::zeros(dim, dim);
    if let Some(sum) = crate::exec::pairwise_reduce(partials, |mut a, b| {
        a.add_scaled(&b, C64::new(1.0, 0.0));
        a
    }) {
        total = sum;
    }
    Ok(DensityMatrix::from_trusted(total.scale_real(1.0 / mass)))
}

/// Pairwise sum of `w |Ψ(t)⟩⟨Ψ(t)|` over a run of nodes.
fn accumulate(sys: &SpectralSystem, nodes: &[(f64, f64)]) -> ComplexMatrix {
    if nodes.len() <= 8 {
        let dim = sys.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &(t, w) in nodes {
            let psi = sys.evolved_amplitudes(t);
            for i in 0..dim {
                let a = psi[i] * w;
                for j in 0..dim {
                    m[(i, j)] += a * psi[j].conj();
                }
            }
        }
        return m;
    }
    let mid = nodes.len() / 2;
    let mut left = accumulate(sys, &nodes[..mid]);
    left.add_scaled(&accumulate(sys, &nodes[mid..]), C64::new(1.0, 0.0));
    left
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localtime::sigma_analytic;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let p30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((p30 - 2.0 / 31.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    fn system() -> SpectralSystem {
        SpectralSystem::new(
            vec![-1.0, 0.5, 2.0],
            vec![C64::new(0.6, 0.0), C64::new(0.0, 0.64), C64::new(0.48, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn tail_corrected_quadrature_matches_closed_form() {
        let law = GaussianTimeLaw::new(1.3, 1.0, 1.5).unwrap();
        let q = sigma_quadrature(&system(), &law, &QuadratureConfig::default()).unwrap();
        let a = sigma_analytic(&system(), &law);
        assert!(q.matrix().max_abs_diff(a.matrix()) < 1e-12);
    }

    #[test]
    fn window_only_quadrature_is_unit_trace() {
        let law = GaussianTimeLaw::new(0.0, 1.0, 1.0).unwrap();
        let cfg = QuadratureConfig {
            tail_correction: false,
            ..Default::default()
        };
        let q = sigma_quadrature(&system(), &law, &cfg).unwrap();
        assert!((q.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_rule_also_converges() {
        let law = GaussianTimeLaw::new(0.4, 2.0, 2.0).unwrap();
        let cfg = QuadratureConfig {
            rule: QuadratureRule::Trapezoid,
            ..Default::default()
        };
        let q = sigma_quadrature(&system(), &law, &cfg).unwrap();
        let a = sigma_analytic(&system(), &law);
        assert!(q.matrix().max_abs_diff(a.matrix()) < 1e-5);
    }

    #[test]
    fn resolution_guard() {
        let sys = SpectralSystem::new(vec![0.0, 1000.0], vec![C64::new(0.5f64.sqrt(), 0.0); 2])
            .unwrap();
        let law = GaussianTimeLaw::new(0.0, 1.0, 3.0).unwrap();
        let cfg = QuadratureConfig {
            nodes: 64,
            ..Default::default()
        };
        assert!(matches!(sigma_quadrature(&sys, &law, &cfg), Err(Error::Resolution(_))));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let law = GaussianTimeLaw::new(0.0, 1.0, 2.0).unwrap();
        let seq = QuadratureConfig {
            exec: Exec::Sequential,
            ..Default::default()
        };
        let a = sigma_quadrature(&system(), &law, &seq).unwrap();
        let b = sigma_quadrature(&system(), &law, &QuadratureConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
