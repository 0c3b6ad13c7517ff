use super::BranchFamily;
use crate::error::{Error, Result};
use crate::qcore::{
    eigh, partial_trace, tensor_product, von_neumann_entropy, ComplexMatrix, DensityMatrix,
    SubsystemSplit,
};
use serde::{Deserialize, Serialize};

/// Information the apparatus holds about the branch index, in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    /// `I(O:A) = S(ρ^A) - Σ_α |b_α|² S(ρ^A_α)`.
    pub mutual: f64,
    /// Shannon entropy `H(O) = -Σ_α |b_α|² ln |b_α|²`.
    pub h_o: f64,
    /// `S(ρ^A)` of `ρ^A = Σ_α |b_α|² ρ^A_α`.
    pub entropy_a: f64,
    /// `S(ρ^A_α)` per populated branch.
    pub branch_entropies: Vec<f64>,
}

/// Mutual information between the branch index and the apparatus.
///
/// Always `0 ≤ I ≤ H(O)`, with equality on the right iff the conditional
/// states have orthogonal supports.
pub fn mutual_information(family: &BranchFamily) -> Result<MutualInformation> {
    let entropy_a = von_neumann_entropy(&family.reduced_apparatus())?;
    let mut branch_entropies = Vec::new();
    let (mut avg, mut h_o) = (0.0, 0.0);
    for a in family.populated() {
        let w = family.b()[a].norm_sqr();
        let s = von_neumann_entropy(&family.rho(a))?;
        avg += w * s;
        h_o -= w * w.ln();
        branch_entropies.push(s);
    }
    Ok(MutualInformation {
        mutual: (entropy_a - avg).clamp(0.0, h_o.max(0.0)),
        h_o: h_o.max(0.0),
        entropy_a,
        branch_entropies,
    })
}

/// `S(O) + S(A) - S(OA)` of a bipartite state, in nats.
pub fn quantum_mutual_information(sigma: &DensityMatrix, split: &SubsystemSplit) -> Result<f64> {
    if split.dims().len() != 2 {
        return Err(Error::Dimension("mutual information needs two factors".into()));
    }
    let so = von_neumann_entropy(&sigma.partial_trace(split, &[0])?)?;
    let sa = von_neumann_entropy(&sigma.partial_trace(split, &[1])?)?;
    let soa = von_neumann_entropy(sigma)?;
    Ok((so + sa - soa).max(0.0))
}

fn check_unitary(u: &ComplexMatrix, dim: usize, name: &str) -> Result<()> {
    if u.rows() != dim || u.cols() != dim {
        return Err(Error::Dimension(format!(
            "{name} basis is {}x{}, expected {dim}x{dim}",
            u.rows(),
            u.cols()
        )));
    }
    let dev = u.adjoint().dot(u).max_abs_diff(&ComplexMatrix::identity(dim));
    if dev > 1e-10 {
        return Err(Error::Parameter(format!(
            "{name} basis is not orthonormal (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// Frobenius distance from `σ` to its dephasing in the product basis whose
/// vectors are the columns of `basis_o` and `basis_a`.
pub fn classical_classical_distance(
    sigma: &DensityMatrix,
    split: &SubsystemSplit,
    basis_o: &ComplexMatrix,
    basis_a: &ComplexMatrix,
) -> Result<f64> {
    if split.dims().len() != 2 || split.total() != sigma.dim() {
        return Err(Error::Dimension("state does not match the bipartite split".into()));
    }
    check_unitary(basis_o, split.dims()[0], "object")?;
    check_unitary(basis_a, split.dims()[1], "apparatus")?;
    let u = tensor_product(basis_o, basis_a)?;
    let rotated = sigma.matrix().conjugate_by(&u)?;
    let n = rotated.rows();
    let off: f64 = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| rotated[(i, j)].norm_sqr())
        .sum();
    Ok(off.sqrt())
}

/// Smallest classical-classical distance over apparatus bases drawn from the
/// eigenbasis of `tr_O σ` and of each conditional block `⟨α|σ|α⟩`.
///
/// Returns the distance and the apparatus basis attaining it.
pub fn classical_classical_distance_min(
    sigma: &DensityMatrix,
    split: &SubsystemSplit,
    basis_o: &ComplexMatrix,
) -> Result<(f64, ComplexMatrix)> {
    if split.dims().len() != 2 || split.total() != sigma.dim() {
        return Err(Error::Dimension("state does not match the bipartite split".into()));
    }
    let (dim_o, dim_a) = (split.dims()[0], split.dims()[1]);
    check_unitary(basis_o, dim_o, "object")?;
    let mut candidates = vec![eigh(&partial_trace(sigma.matrix(), split, &[1])?)?.1];
    let u_o = tensor_product(basis_o, &ComplexMatrix::identity(dim_a))?;
    let rotated = sigma.matrix().conjugate_by(&u_o)?;
    for a in 0..dim_o {
        let block = ComplexMatrix::from_fn(dim_a, dim_a, |i, j| rotated[(a * dim_a + i, a * dim_a + j)]);
        if block.trace().re > 1e-14 {
            candidates.push(eigh(&block)?.1);
        }
    }
    let mut best: Option<(f64, ComplexMatrix)> = None;
    for basis in candidates {
        let d = classical_classical_distance(sigma, split, basis_o, &basis)?;
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, basis));
        }
    }
    Ok(best.expect("at least one candidate basis"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::SeparableInteraction;
    use crate::localtime::GaussianTimeLaw;
    use crate::qcore::PureState;
    use crate::C64;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn bell_state_information() {
        let s = 0.5f64.sqrt();
        let bell = PureState::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap().projector();
        let split = SubsystemSplit::bipartite(2, 2).unwrap();
        let mi = quantum_mutual_information(&bell, &split).unwrap();
        assert!((mi - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    fn family(levels: [[f64; 2]; 2], d: Vec<C64>) -> BranchFamily {
        let h = SeparableInteraction::from_fn(2, 2, |a, b| levels[a][b]).unwrap();
        let s = c(0.5f64.sqrt());
        BranchFamily::new(h, vec![s, s], d, GaussianTimeLaw::new(0.0, 1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn identical_branches_carry_no_information() {
        let s = 0.5f64.sqrt();
        let f = family([[0.3, -0.3], [0.3, -0.3]], vec![c(s), c(s)]);
        let mi = mutual_information(&f).unwrap();
        assert!(mi.mutual < 1e-12);
        assert!((mi.h_o - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn information_never_exceeds_branch_entropy() {
        let f = family([[0.0, 1.0], [2.0, -1.5]], vec![c(0.6), C64::new(0.0, 0.8)]);
        let mi = mutual_information(&f).unwrap();
        assert!(mi.mutual <= mi.h_o + 1e-10);
        assert!(mi.mutual > 0.0);
    }

    #[test]
    fn classically_correlated_state_has_zero_distance() {
        let m = ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.5]);
        let sigma = DensityMatrix::from_trusted(m);
        let split = SubsystemSplit::bipartite(2, 2).unwrap();
        let id = ComplexMatrix::identity(2);
        assert!(classical_classical_distance(&sigma, &split, &id, &id).unwrap() < 1e-15);
    }

    #[test]
    fn bell_state_is_not_classical() {
        let s = 0.5f64.sqrt();
        let bell = PureState::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap().projector();
        let split = SubsystemSplit::bipartite(2, 2).unwrap();
        let id = ComplexMatrix::identity(2);
        let d = classical_classical_distance(&bell, &split, &id, &id).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        let (best, _) = classical_classical_distance_min(&bell, &split, &id).unwrap();
        assert!(best <= d + 1e-12);
    }

    #[test]
    fn rejects_non_unitary_basis() {
        let sigma = DensityMatrix::maximally_mixed(4);
        let split = SubsystemSplit::bipartite(2, 2).unwrap();
        let bad = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let id = ComplexMatrix::identity(2);
        assert!(classical_classical_distance(&sigma, &split, &bad, &id).is_err());
    }
}
