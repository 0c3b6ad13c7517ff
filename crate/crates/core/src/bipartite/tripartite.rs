use super::{branch_operator, SeparableInteraction};
use crate::error::{Error, Result};
use crate::localtime::GaussianTimeLaw;
use crate::qcore::{ComplexMatrix, DensityMatrix, SubsystemSplit, Tolerances, MAX_TENSOR_ENTRIES};
use crate::C64;

/// Object, apparatus and environment after premeasurement, time-averaged
/// through the environment interaction.
#[derive(Clone, Debug)]
pub struct TripartiteState {
    pub sigma: DensityMatrix,
    pub split: SubsystemSplit,
    /// `tr_E σ`.
    pub rho_oa: DensityMatrix,
    /// `tr_AE σ`.
    pub rho_o: DensityMatrix,
}

/// `σ = Σ_αα' b_α b_α'* |α⟩⟨α'| ⊗ |A_α⟩⟨A_α'| ⊗ ρ^E_αα'`, where the apparatus
/// pointer for branch `α` is basis state `pairing[α]` and the environment
/// couples to the apparatus pointer through `environment` (indexed by `α`).
pub fn tripartite_sigma(
    b: &[C64],
    pairing: &[usize],
    dim_apparatus: usize,
    environment: &SeparableInteraction,
    d_env: &[C64],
    law: &GaussianTimeLaw,
) -> Result<TripartiteState> {
    let m = b.len();
    if pairing.len() != m || environment.dim_o() != m {
        return Err(Error::Model(format!(
            "{m} branches, {} pointer states, {} environment rows",
            pairing.len(),
            environment.dim_o()
        )));
    }
    if pairing.iter().any(|&p| p >= dim_apparatus) {
        return Err(Error::Parameter("pointer index outside the apparatus".into()));
    }
    let e = environment.dim_a();
    if d_env.len() != e {
        return Err(Error::Model(format!("{} environment amplitudes for dimension {e}", d_env.len())));
    }
    for (name, amps) in [("object", b), ("environment", d_env)] {
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > Tolerances::default().state_norm {
            return Err(Error::Normalization(format!("{name} state has squared norm {norm}")));
        }
    }
    let split = SubsystemSplit::new(vec![m, dim_apparatus, e])?;
    let n = split.total();
    if n.checked_mul(n).is_none_or(|x| x > MAX_TENSOR_ENTRIES) {
        return Err(Error::Size(format!("tripartite dimension {n} exceeds the dense cap")));
    }
    let mut sigma = ComplexMatrix::zeros(n, n);
    for a in 0..m {
        for ap in 0..m {
            let coef = b[a] * b[ap].conj();
            if coef.norm_sqr() == 0.0 {
                continue;
            }
            let op = branch_operator(environment, d_env, a, ap, law);
            let row0 = (a * dim_apparatus + pairing[a]) * e;
            let col0 = (ap * dim_apparatus + pairing[ap]) * e;
            for i in 0..e {
                for j in 0..e {
                    sigma[(row0 + i, col0 + j)] = coef * op[(i, j)];
                }
            }
        }
    }
    let sigma = DensityMatrix::from_trusted(sigma);
    let rho_oa = sigma.partial_trace(&split, &[0, 1])?;
    let rho_o = sigma.partial_trace(&split, &[0])?;
    Ok(TripartiteState {
        sigma,
        split,
        rho_oa,
        rho_o,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn trivial_environment_leaves_premeasurement_pure() {
        let s = 0.5f64.sqrt();
        let env = SeparableInteraction::new(2, 1, vec![0.0, 0.0]).unwrap();
        let law = GaussianTimeLaw::new(3.0, 1.0, 1.0).unwrap();
        let st = tripartite_sigma(&[c(s), c(s)], &[0, 1], 2, &env, &[c(1.0)], &law).unwrap();
        assert!((st.rho_oa.purity() - 1.0).abs() < 1e-15);
        let expected = ComplexMatrix::from_fn(4, 4, |i, j| {
            if (i == 0 || i == 3) && (j == 0 || j == 3) { c(0.5) } else { c(0.0) }
        });
        assert!(st.rho_oa.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn distinguishing_environment_dephases_object() {
        let s = 0.5f64.sqrt();
        let env = SeparableInteraction::from_fn(2, 2, |a, b| if a == b { 0.0 } else { 5.0 }).unwrap();
        let law = GaussianTimeLaw::new(0.0, 1.0, 1.0).unwrap();
        let st = tripartite_sigma(&[c(s), c(s)], &[0, 1], 2, &env, &[c(1.0), c(0.0)], &law).unwrap();
        let off = st.rho_oa.matrix()[(0, 3)].norm();
        assert!((off - 0.5 * (-25.0f64 / 4.0).exp()).abs() < 1e-15);
        // Orthogonal pointers already remove the object coherence.
        assert_eq!(st.rho_o.matrix()[(0, 1)].norm(), 0.0);
        assert!((st.rho_o.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
    }
}
