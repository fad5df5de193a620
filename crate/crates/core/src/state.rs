use crate::lattice::{DimensionCap, Volume};
use crate::linalg::{self, Eigensystem};
use crate::operator::{LatticeOperator, CLAMP_TOL, LOG_FLOOR};
use crate::prelude::*;

/// Accepted deviation of the trace from 1 before renormalizing.
const TRACE_TOL: f64 = 1e-9;

/// Positive unit-trace operator with its spectral decomposition computed at
/// construction.
///
/// Eigenvalues are stored in descending order; values in `[−1e-12, 0)` are
/// clamped to zero.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: LatticeOperator,
    probabilities: Vec<f64>,
    vectors: CMatrix,
}

impl DensityMatrix {
    /// Validates and diagonalizes `op`.
    pub fn new(op: LatticeOperator) -> Result<Self> {
        if !op.is_hermitian() {
            let deviation = linalg::antihermitian_deviation(op.matrix()) / linalg::frobenius(op.matrix());
            return Err(Error::NotHermitian { deviation });
        }
        let trace = op.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL || trace.is_nan() {
            return Err(Error::NotNormalized { trace });
        }
        let op = if trace == 1.0 { op } else { op.scale(1.0 / trace) };
        let eig = Eigensystem::hermitian(op.matrix());
        Self::from_eigensystem(op, eig)
    }

    /// Builds a state from an operator and an eigensystem known to belong to it.
    pub(crate) fn from_eigensystem(op: LatticeOperator, eig: Eigensystem) -> Result<Self> {
        let min = eig.min();
        if min < -CLAMP_TOL {
            return Err(Error::NonPositiveSpectrum { min });
        }
        let n = eig.values().len();
        let probabilities: Vec<f64> = eig.values().iter().rev().map(|&p| p.max(0.0)).collect();
        let src = eig.vectors();
        let vectors = CMatrix::from_fn(src.nrows(), n, |i, j| src[(i, n - 1 - j)]);
        Ok(Self { op, probabilities, vectors })
    }

    /// `Σ p_k |v_k⟩⟨v_k|` from orthonormal columns `vectors` and weights
    /// summing to one.
    pub(crate) fn from_spectral(volume: Volume, site_dim: usize, probabilities: Vec<f64>, vectors: CMatrix) -> Self {
        let m = linalg::spectral_sum(&vectors, &probabilities);
        let op = LatticeOperator::from_parts(volume, site_dim, linalg::hermitian_part(&m), true);
        let mut order: Vec<usize> = (0..probabilities.len()).collect();
        order.sort_by(|&a, &b| probabilities[b].total_cmp(&probabilities[a]));
        let p = order.iter().map(|&k| probabilities[k].max(0.0)).collect();
        let v = CMatrix::from_fn(vectors.nrows(), order.len(), |i, j| vectors[(i, order[j])]);
        Self { op, probabilities: p, vectors: v }
    }

    /// Assembles a state from parts known to be consistent: `op` equals
    /// `Σ p_k |v_k⟩⟨v_k|` with `probabilities` descending.
    pub(crate) fn from_raw(op: LatticeOperator, probabilities: Vec<f64>, vectors: CMatrix) -> Self {
        Self { op, probabilities, vectors }
    }

    /// Projector onto a normalized vector.
    pub fn pure(volume: Volume, site_dim: usize, psi: &[C64]) -> Result<Self> {
        let dim = volume.hilbert_dim(site_dim, DimensionCap(usize::MAX))?;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
        }
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero norm".into()));
        }
        let v = CMatrix::from_fn(dim, 1, |i, _| psi[i] / norm);
        Ok(Self::from_spectral_completed(volume, site_dim, v))
    }

    /// Pure state; the eigenbasis is completed to a unitary by diagonalizing
    /// the projector.
    fn from_spectral_completed(volume: Volume, site_dim: usize, v: CMatrix) -> Self {
        let proj = linalg::matmul(&v, &v.adjoint());
        let op = LatticeOperator::from_parts(volume, site_dim, proj, true);
        let eig = Eigensystem::hermitian(op.matrix());
        Self::from_eigensystem(op, eig).expect("projector is positive")
    }

    pub fn maximally_mixed(volume: Volume, site_dim: usize, cap: DimensionCap) -> Result<Self> {
        let dim = volume.hilbert_dim(site_dim, cap)?;
        let p = 1.0 / dim as f64;
        let op = LatticeOperator::from_parts(volume, site_dim, CMatrix::identity(dim, dim) * C64::new(p, 0.0), true);
        Ok(Self { op, probabilities: vec![p; dim], vectors: CMatrix::identity(dim, dim) })
    }

    pub fn op(&self) -> &LatticeOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn volume(&self) -> &Volume {
        self.op.volume()
    }

    pub fn site_dim(&self) -> usize {
        self.op.site_dim()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Eigenvalues in descending order, clamped to be nonnegative.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.probabilities
    }

    /// Eigenvectors as columns, matching [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.probabilities.last().copied().unwrap_or(0.0)
    }

    /// `Tr(ρ A)`. Operators on a subvolume are paired with the reduced state.
    pub fn expectation(&self, a: &LatticeOperator) -> Result<C64> {
        if a.volume() == self.volume() {
            return self.op.trace_product(a);
        }
        if a.site_dim() != self.site_dim() {
            return Err(Error::VolumeMismatch);
        }
        // Tr(ρ (A ⊗ 1)) = Tr(ρ_S A), cheaper than embedding A
        let reduced = self.op.partial_trace(a.volume())?;
        reduced.trace_product(a)
    }

    /// Reduced state on `keep`.
    pub fn partial_trace(&self, keep: &Volume) -> Result<DensityMatrix> {
        if keep == self.volume() {
            return Ok(self.clone());
        }
        let reduced = self.op.partial_trace(keep)?;
        let eig = Eigensystem::hermitian(reduced.matrix());
        Self::from_eigensystem(reduced, eig)
    }

    /// `log ρ`; rank-deficient states are rejected.
    pub fn log(&self) -> Result<LatticeOperator> {
        let min = self.min_eigenvalue();
        if min <= LOG_FLOOR {
            return Err(Error::StateNotFaithful { min });
        }
        let logs: Vec<f64> = self.probabilities.iter().map(|p| p.ln()).collect();
        let m = linalg::spectral_sum(&self.vectors, &logs);
        Ok(LatticeOperator::from_parts(self.volume().clone(), self.site_dim(), linalg::hermitian_part(&m), true))
    }

    /// `−Σ p log p` with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probabilities)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let diff = self.op.sub(&other.op)?;
        Ok(0.5 * linalg::eigvalsh(diff.matrix()).iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Operator-norm distance between `ρ` and `Σ p_k |v_k⟩⟨v_k|`.
    pub fn reconstruction_error(&self) -> f64 {
        let m = linalg::spectral_sum(&self.vectors, &self.probabilities);
        linalg::operator_norm(&(m - self.matrix()))
    }
}

pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Point;
    use crate::pauli;
    use approx::assert_relative_eq;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let vol = Volume::interval(0, 2).unwrap();
        let s = 0.5f64.sqrt();
        let bell = DensityMatrix::pure(vol, 2, &[c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let left = bell.partial_trace(&Volume::site(Point::at(0))).unwrap();
        assert_relative_eq!(linalg::frobenius(&(left.matrix() - pauli::identity() * c(0.5))), 0.0, epsilon = 1e-15);
        assert_relative_eq!(bell.entropy(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(left.entropy(), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn maximally_mixed_marginals() {
        let vol = Volume::interval(0, 3).unwrap();
        let rho = DensityMatrix::maximally_mixed(vol, 2, DimensionCap::default()).unwrap();
        let one = rho.partial_trace(&Volume::site(Point::at(1))).unwrap();
        assert_relative_eq!(linalg::frobenius(&(one.matrix() - pauli::identity() * c(0.5))), 0.0, epsilon = 1e-15);
        assert_relative_eq!(rho.entropy(), 3.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_descend_and_reconstruct() {
        let vol = Volume::site(Point::at(0));
        let m = CMatrix::from_row_slice(2, 2, &[c(0.25), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.75)]);
        let rho = DensityMatrix::new(LatticeOperator::new(vol, 2, m).unwrap()).unwrap();
        assert!(rho.eigenvalues()[0] >= rho.eigenvalues()[1]);
        assert!(rho.reconstruction_error() < 1e-14);
    }

    #[test]
    fn rejects_invalid_states() {
        let vol = Volume::site(Point::at(0));
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(
            DensityMatrix::new(LatticeOperator::new(vol.clone(), 2, neg).unwrap()),
            Err(Error::NonPositiveSpectrum { .. })
        ));
        let unnormalized = pauli::identity();
        assert!(matches!(
            DensityMatrix::new(LatticeOperator::new(vol.clone(), 2, unnormalized).unwrap()),
            Err(Error::NotNormalized { .. })
        ));
        let pure = DensityMatrix::pure(vol, 2, &[c(1.0), c(0.0)]).unwrap();
        assert!(matches!(pure.log(), Err(Error::StateNotFaithful { .. })));
    }

    #[test]
    fn diagonal_entropy() {
        let vol = Volume::site(Point::at(0));
        let m = CMatrix::from_row_slice(2, 2, &[c(0.75), c(0.0), c(0.0), c(0.25)]);
        let rho = DensityMatrix::new(LatticeOperator::new(vol, 2, m).unwrap()).unwrap();
        let want = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert_relative_eq!(rho.entropy(), want, epsilon = 1e-15);
    }
}
