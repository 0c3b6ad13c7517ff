use super::{eigvalsh, ComplexMatrix};
use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Numerical tolerances used when accepting a matrix as a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest accepted `|A_ij - conj(A_ji)|`.
    pub hermitian: f64,
    /// Largest accepted `|tr A - 1|`.
    pub trace: f64,
    /// Trace deviations above this (and within `trace`) are renormalized away.
    pub trace_renormalize: f64,
    /// Eigenvalues in `[-positivity, 0)` count as zero.
    pub positivity: f64,
    /// Largest accepted `| ‖ψ‖² - 1 |` for pure states.
    pub state_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-8,
            trace_renormalize: 1e-10,
            positivity: 1e-9,
            state_norm: 1e-10,
        }
    }
}

/// Factor dimensions of a composite Hilbert space, first factor slowest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemSplit {
    dims: Vec<usize>,
    total: usize,
}

impl SubsystemSplit {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid factor dimensions {dims:?}")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Size(format!("product of {dims:?} overflows")))?;
        Ok(Self { dims, total })
    }

    pub fn bipartite(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Row-major strides of each factor.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat offsets of every multi-index over the given factors.
    fn offsets(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(offsets.len() * self.dims[f]);
            for &o in &offsets {
                for x in 0..self.dims[f] {
                    next.push(o + x * strides[f]);
                }
            }
            offsets = next;
        }
        offsets
    }
}

/// Normalized pure state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose squared norm is within tolerance of one.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("empty state vector".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > Tolerances::default().state_norm {
            return Err(Error::Normalization(format!(
                "state has squared norm {norm_sqr}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Divides by the norm; errors on a zero or non-finite vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub(crate) fn from_unit(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                out.push(a * b);
            }
        }
        PureState { amplitudes: out }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix the caller has constructed to be a valid state.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        // tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.matrix.frobenius_norm().powi(2)
    }

    /// `tr(ρ A)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator {}x{} for state of dimension {}",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        // tr(ρA) = Σ_ij ρ_ij A_ji
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Ascending eigenvalues with round-off negatives clamped to zero.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigvalsh(&self.matrix)?
            .into_iter()
            .map(|v| v.max(0.0))
            .collect())
    }

    /// Reduced state on the factors listed in `keep`.
    pub fn partial_trace(&self, split: &SubsystemSplit, keep: &[usize]) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            matrix: partial_trace(&self.matrix, split, keep)?,
        })
    }
}

/// Validates with [`Tolerances::default`].
pub fn validate_density(m: &ComplexMatrix) -> Result<DensityMatrix> {
    validate_density_with(m, &Tolerances::default())
}

/// Accepts `m` as a density matrix.
///
/// Entries are Hermitian-symmetrized when the deviation is within tolerance,
/// a small trace error is renormalized away, and eigenvalues slightly below
/// zero are tolerated.
pub fn validate_density_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::Dimension(format!(
            "density matrix must be square and non-empty, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parameter("density matrix has non-finite entries".into()));
    }
    let dev = m.hermitian_deviation();
    if dev > tol.hermitian {
        return Err(Error::NotHermitian(dev));
    }
    let mut h = m.hermitian_part();
    let tr = h.trace().re;
    if (tr - 1.0).abs() > tol.trace {
        return Err(Error::Normalization(format!("trace is {tr}")));
    }
    if (tr - 1.0).abs() > tol.trace_renormalize {
        h = h.scale_real(1.0 / tr);
    }
    let smallest = eigvalsh(&h)?.first().copied().unwrap_or(0.0);
    if smallest < -tol.positivity {
        return Err(Error::Positivity(smallest));
    }
    Ok(DensityMatrix { matrix: h })
}

/// Partial trace over every factor not listed in `keep`.
///
/// `keep` must be strictly increasing; the result orders the kept factors the
/// same way.
pub fn partial_trace(
    rho: &ComplexMatrix,
    split: &SubsystemSplit,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if !rho.is_square() || rho.rows() != split.total() {
        return Err(Error::Dimension(format!(
            "matrix {}x{} does not match factors {:?}",
            rho.rows(),
            rho.cols(),
            split.dims()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= split.dims().len()) {
        return Err(Error::Parameter(format!(
            "kept factors {keep:?} must be increasing indices below {}",
            split.dims().len()
        )));
    }
    let traced: Vec<usize> = (0..split.dims().len()).filter(|k| !keep.contains(k)).collect();
    let kept_off = split.offsets(keep);
    let traced_off = split.offsets(&traced);
    let n = kept_off.len();
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        traced_off
            .iter()
            .map(|&t| rho[(kept_off[a] + t, kept_off[b] + t)])
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::tensor_product;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn accepts_maximally_mixed() {
        let m = ComplexMatrix::identity(4).scale_real(0.25);
        let d = validate_density(&m).unwrap();
        assert_eq!(d.matrix(), &m);
    }

    #[test]
    fn rejects_negative_eigenvalue() {
        let m = ComplexMatrix::from_real_diag(&[1.2, -0.2]);
        assert!(matches!(validate_density(&m), Err(Error::Positivity(_))));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        m[(0, 1)] = c(1e-6);
        assert!(matches!(validate_density(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn symmetrizes_tiny_asymmetry() {
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.1, 1e-12);
        m[(1, 0)] = C64::new(0.1, 1e-12);
        let d = validate_density(&m).unwrap();
        assert_eq!(d.matrix().hermitian_deviation(), 0.0);
    }

    #[test]
    fn trace_handling() {
        let renorm = ComplexMatrix::from_real_diag(&[0.5 + 5e-9, 0.5]);
        let d = validate_density(&renorm).unwrap();
        assert!((d.trace().re - 1.0).abs() < 1e-15);
        let bad = ComplexMatrix::from_real_diag(&[0.5 + 5e-8, 0.5]);
        assert!(matches!(validate_density(&bad), Err(Error::Normalization(_))));
    }

    #[test]
    fn tolerates_roundoff_negative_eigenvalue() {
        let m = ComplexMatrix::from_real_diag(&[1.0 + 5e-10, -5e-10]);
        let d = validate_density(&m).unwrap();
        assert_eq!(d.eigenvalues().unwrap()[0], 0.0);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let psi = PureState::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let split = SubsystemSplit::bipartite(2, 2).unwrap();
        for keep in [[0], [1]] {
            let r = psi.projector().partial_trace(&split, &keep).unwrap();
            assert!(r.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_three_factors_keeps_order() {
        let a = ComplexMatrix::from_real_diag(&[0.25, 0.75]);
        let b = ComplexMatrix::from_real_diag(&[0.1, 0.2, 0.7]);
        let cm = ComplexMatrix::from_real_diag(&[0.6, 0.4]);
        let abc = tensor_product(&tensor_product(&a, &b).unwrap(), &cm).unwrap();
        let split = SubsystemSplit::new(vec![2, 3, 2]).unwrap();
        let ac = partial_trace(&abc, &split, &[0, 2]).unwrap();
        assert!(ac.max_abs_diff(&tensor_product(&a, &cm).unwrap()) < 1e-15);
        let b_only = partial_trace(&abc, &split, &[1]).unwrap();
        assert!(b_only.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let split = SubsystemSplit::bipartite(2, 2).unwrap();
        let m = ComplexMatrix::identity(4);
        assert!(partial_trace(&m, &split, &[1, 0]).is_err());
        assert!(partial_trace(&m, &split, &[2]).is_err());
        assert!(partial_trace(&ComplexMatrix::identity(3), &split, &[0]).is_err());
    }

    #[test]
    fn pure_state_norm_check() {
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        let p = PureState::normalized(vec![c(3.0), c(4.0)]).unwrap();
        assert!((p.amplitudes()[1].re - 0.8).abs() < 1e-15);
        assert!(PureState::normalized(vec![c(0.0)]).is_err());
    }
}
