use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::C64;
use nalgebra::{DMatrix, SymmetricEigen};

const MAX_SWEEPS: usize = 10_000;
const HERMITIAN_TOL: f64 = 1e-10;

fn to_nalgebra(m: &ComplexMatrix) -> Result<DMatrix<C64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.data().iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    // The solver reads one triangle; feed it the exact Hermitian part.
    let h = m.hermitian_part();
    Ok(DMatrix::from_fn(m.rows(), m.cols(), |i, j| h[(i, j)]))
}

fn solve(m: &ComplexMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    let a = to_nalgebra(m)?;
    SymmetricEigen::try_new(a, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Eigen(format!("no convergence for dimension {}", m.rows())))
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are ascending; column `k` of the returned matrix is the
/// normalized eigenvector for eigenvalue `k`.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let eig = solve(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let a = to_nalgebra(m)?;
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
