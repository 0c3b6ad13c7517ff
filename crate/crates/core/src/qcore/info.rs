use super::{ComplexMatrix, DensityMatrix, PureState};
use crate::error::{Error, Result};

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|&w| w > 0.0)
        .map(|w| -w * w.ln())
        .sum::<f64>()
        .max(0.0))
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// `F = sqrt(⟨ψ|ρ|ψ⟩)`, in `[0, 1]`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::Dimension(format!(
            "state of dimension {} against density matrix of dimension {}",
            psi.dim(),
            rho.dim()
        )));
    }
    let v = rho.matrix().apply(psi.amplitudes())?;
    let overlap: f64 = psi
        .amplitudes()
        .iter()
        .zip(&v)
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    Ok(overlap.max(0.0).sqrt().min(1.0))
}

/// `‖A B‖_F`, the orthogonality measure between two operators.
pub fn overlap_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "operators {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.dot(b).frobenius_norm())
}
