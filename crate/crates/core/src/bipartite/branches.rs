use super::SeparableInteraction;
use crate::error::{Error, Result};
use crate::localtime::GaussianTimeLaw;
use crate::qcore::{ComplexMatrix, DensityMatrix, PureState, Tolerances, MAX_TENSOR_ENTRIES};
use crate::C64;
use std::collections::BTreeMap;

fn check_amplitudes(name: &str, amps: &[C64], dim: usize) -> Result<()> {
    if amps.len() != dim {
        return Err(Error::Model(format!(
            "{name} has {} amplitudes, expected {dim}",
            amps.len()
        )));
    }
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if !norm.is_finite() || (norm - 1.0).abs() > Tolerances::default().state_norm {
        return Err(Error::Normalization(format!(
            "{name} has squared norm {norm}"
        )));
    }
    Ok(())
}

/// `|Ψ(t)⟩ = Σ_αβ b_α d_β e^{-i t h_αβ} |α⟩|β⟩`.
pub fn evolve_branches(
    interaction: &SeparableInteraction,
    b: &[C64],
    d: &[C64],
    t: f64,
) -> Result<PureState> {
    check_amplitudes("object state", b, interaction.dim_o())?;
    check_amplitudes("apparatus state", d, interaction.dim_a())?;
    let mut out = Vec::with_capacity(b.len() * d.len());
    for (alpha, &ba) in b.iter().enumerate() {
        for (beta, &db) in d.iter().enumerate() {
            out.push(ba * db * C64::from_polar(1.0, -t * interaction.level(alpha, beta)));
        }
    }
    Ok(PureState::from_unit(out))
}

/// `(ρ_αα')_ββ' = d_β d_β'* e^{-i t0 (h_αβ - h_α'β')} e^{-(h_αβ - h_α'β')² / 4λ}`.
pub fn branch_operator(
    interaction: &SeparableInteraction,
    d: &[C64],
    alpha: usize,
    alpha_prime: usize,
    law: &GaussianTimeLaw,
) -> ComplexMatrix {
    let (t0, scale) = (law.t0(), 4.0 * law.lambda());
    let row = interaction.row(alpha);
    let row_p = interaction.row(alpha_prime);
    ComplexMatrix::from_fn(d.len(), d.len(), |i, j| {
        let delta = row[i] - row_p[j];
        d[i] * d[j].conj() * C64::from_polar((-delta * delta / scale).exp(), -t0 * delta)
    })
}

/// All branch operators of a separable interaction at one readout law.
#[derive(Clone, Debug)]
pub struct BranchFamily {
    interaction: SeparableInteraction,
    b: Vec<C64>,
    d: Vec<C64>,
    law: GaussianTimeLaw,
    /// `ρ_αα'` for `α ≤ α'`.
    ops: BTreeMap<(usize, usize), ComplexMatrix>,
}

impl BranchFamily {
    pub fn new(
        interaction: SeparableInteraction,
        b: Vec<C64>,
        d: Vec<C64>,
        law: GaussianTimeLaw,
    ) -> Result<Self> {
        check_amplitudes("object state", &b, interaction.dim_o())?;
        check_amplitudes("apparatus state", &d, interaction.dim_a())?;
        let (m, k) = (interaction.dim_o(), interaction.dim_a());
        let stored = (m * (m + 1) / 2).checked_mul(k * k);
        if stored.is_none_or(|n| n > MAX_TENSOR_ENTRIES) {
            return Err(Error::Size(format!(
                "{m} branches on a {k}-dimensional apparatus exceed the storage cap"
            )));
        }
        let mut family = Self {
            interaction,
            b,
            d,
            law,
            ops: BTreeMap::new(),
        };
        family.rebuild();
        Ok(family)
    }

    fn rebuild(&mut self) {
        self.ops.clear();
        let m = self.interaction.dim_o();
        for a in 0..m {
            for ap in a..m {
                let op = branch_operator(&self.interaction, &self.d, a, ap, &self.law);
                self.ops.insert((a, ap), op);
            }
        }
    }

    /// The same family read out around a different `t0`.
    pub fn at(&self, t0: f64) -> Result<Self> {
        let mut next = Self {
            interaction: self.interaction.clone(),
            b: self.b.clone(),
            d: self.d.clone(),
            law: self.law.with_t0(t0)?,
            ops: BTreeMap::new(),
        };
        next.rebuild();
        Ok(next)
    }

    pub fn interaction(&self) -> &SeparableInteraction {
        &self.interaction
    }

    pub fn b(&self) -> &[C64] {
        &self.b
    }

    pub fn d(&self) -> &[C64] {
        &self.d
    }

    pub fn law(&self) -> &GaussianTimeLaw {
        &self.law
    }

    pub fn dim_o(&self) -> usize {
        self.interaction.dim_o()
    }

    pub fn dim_a(&self) -> usize {
        self.interaction.dim_a()
    }

    /// Object indices with non-negligible weight.
    pub fn populated(&self) -> Vec<usize> {
        (0..self.dim_o())
            .filter(|&a| self.b[a].norm_sqr() > 1e-15)
            .collect()
    }

    /// `ρ_αα'`, for any ordering of the indices.
    pub fn operator(&self, alpha: usize, alpha_prime: usize) -> ComplexMatrix {
        if alpha <= alpha_prime {
            self.ops[&(alpha, alpha_prime)].clone()
        } else {
            self.ops[&(alpha_prime, alpha)].adjoint()
        }
    }

    /// `ρ_αα'` for `α < α'` without copying.
    pub fn cross(&self, alpha: usize, alpha_prime: usize) -> &ComplexMatrix {
        &self.ops[&(alpha.min(alpha_prime), alpha.max(alpha_prime))]
    }

    /// Conditional apparatus state `ρ_α`.
    pub fn rho(&self, alpha: usize) -> DensityMatrix {
        DensityMatrix::from_trusted(self.ops[&(alpha, alpha)].clone())
    }

    /// `tr ρ_αα'`.
    pub fn trace(&self, alpha: usize, alpha_prime: usize) -> C64 {
        let t = self.cross(alpha, alpha_prime).trace();
        if alpha <= alpha_prime {
            t
        } else {
            t.conj()
        }
    }

    fn check_joint_size(&self) -> Result<usize> {
        let n = self.dim_o() * self.dim_a();
        if n.checked_mul(n).is_none_or(|e| e > MAX_TENSOR_ENTRIES) {
            return Err(Error::Size(format!(
                "joint dimension {n} exceeds the dense cap"
            )));
        }
        Ok(n)
    }

    /// `σ = Σ_αα' b_α b_α'* |α⟩⟨α'| ⊗ ρ_αα'`.
    pub fn assemble_sigma(&self) -> Result<DensityMatrix> {
        self.assemble(|_, _| true)
    }

    /// `Σ_α |b_α|² |α⟩⟨α| ⊗ ρ_α`, the part of `σ` diagonal in the object basis.
    pub fn pointer_diagonal_part(&self) -> Result<DensityMatrix> {
        self.assemble(|a, ap| a == ap)
    }

    fn assemble(&self, keep: impl Fn(usize, usize) -> bool) -> Result<DensityMatrix> {
        let n = self.check_joint_size()?;
        let k = self.dim_a();
        let mut m = ComplexMatrix::zeros(n, n);
        for a in 0..self.dim_o() {
            for ap in 0..self.dim_o() {
                if !keep(a, ap) {
                    continue;
                }
                let coef = self.b[a] * self.b[ap].conj();
                let op = self.operator(a, ap);
                for i in 0..k {
                    for j in 0..k {
                        m[(a * k + i, ap * k + j)] = coef * op[(i, j)];
                    }
                }
            }
        }
        Ok(DensityMatrix::from_trusted(m))
    }

    /// `tr_O σ = Σ_α |b_α|² ρ_α`.
    pub fn reduced_apparatus(&self) -> DensityMatrix {
        let k = self.dim_a();
        let mut m = ComplexMatrix::zeros(k, k);
        for a in 0..self.dim_o() {
            m.add_scaled(&self.ops[&(a, a)], C64::new(self.b[a].norm_sqr(), 0.0));
        }
        DensityMatrix::from_trusted(m)
    }

    /// `tr_A σ = Σ_αα' b_α b_α'* tr ρ_αα' |α⟩⟨α'|`.
    pub fn reduced_object(&self) -> DensityMatrix {
        let m = self.dim_o();
        DensityMatrix::from_trusted(ComplexMatrix::from_fn(m, m, |a, ap| {
            self.b[a] * self.b[ap].conj() * self.trace(a, ap)
        }))
    }
}
