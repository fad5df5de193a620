use crate::lattice::{DimensionCap, Volume};
use crate::linalg::{self, Eigensystem, ONE, ZERO};
use crate::prelude::*;

/// Relative tolerance (Frobenius) for treating a matrix as Hermitian.
pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

/// Scalar functions available through spectral calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Exp,
    /// Natural logarithm; needs a strictly positive spectrum.
    Log,
    /// `x^p`; negative or fractional powers need a nonnegative spectrum,
    /// negative powers a strictly positive one.
    Power(f64),
}

/// Dense operator on the tensor-product space `⊗_{x∈Λ} C^dim` of a volume.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    volume: Volume,
    site_dim: usize,
    matrix: CMatrix,
    hermitian: bool,
}

/// Index offsets of a sub-collection of sites inside a volume's basis.
///
/// `offsets[a]` is the basis index in the full space contributed by the
/// sub-configuration `a` (with all other sites in state 0).
fn offsets(site_dim: usize, n_sites: usize, positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    let count = site_dim.pow(k as u32);
    let strides: Vec<usize> = positions.iter().map(|&p| site_dim.pow((n_sites - 1 - p) as u32)).collect();
    let mut out = Vec::with_capacity(count);
    let mut digits = vec![0usize; k];
    for _ in 0..count {
        out.push(digits.iter().zip(&strides).map(|(d, s)| d * s).sum());
        for j in (0..k).rev() {
            digits[j] += 1;
            if digits[j] < site_dim {
                break;
            }
            digits[j] = 0;
        }
    }
    out
}

/// Positions of `sub`'s sites in `vol`, plus the positions of the remaining sites.
fn split_positions(sub: &Volume, vol: &Volume) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut inside = Vec::with_capacity(sub.len());
    for p in sub.sites() {
        inside.push(vol.position(p).ok_or(Error::SupportNotContained)?);
    }
    let rest = (0..vol.len()).filter(|k| !inside.contains(k)).collect();
    Ok((inside, rest))
}

/// Adds `coeff · (a ⊗ 1)` into `target`, where `a` acts on `support ⊆ vol`.
pub(crate) fn accumulate_embedded(
    target: &mut CMatrix,
    vol: &Volume,
    site_dim: usize,
    support: &Volume,
    a: &CMatrix,
    coeff: C64,
) -> Result<()> {
    let (inside, rest) = split_positions(support, vol)?;
    let loc = offsets(site_dim, vol.len(), &inside);
    let env = offsets(site_dim, vol.len(), &rest);
    if a.nrows() != loc.len() {
        return Err(Error::DimensionMismatch { expected: loc.len(), found: a.nrows() });
    }
    for (i, &oi) in loc.iter().enumerate() {
        for (j, &oj) in loc.iter().enumerate() {
            let v = coeff * a[(i, j)];
            if v == ZERO {
                continue;
            }
            for &e in &env {
                target[(oi + e, oj + e)] += v;
            }
        }
    }
    Ok(())
}

impl LatticeOperator {
    /// Wraps a matrix; the Hermitian flag is detected.
    pub fn new(volume: Volume, site_dim: usize, matrix: CMatrix) -> Result<Self> {
        let expected = crate::lattice::checked_dim(site_dim, volume.len())
            .ok_or(Error::VolumeTooLarge { dim: usize::MAX, cap: usize::MAX })?;
        if site_dim < 2 {
            return Err(Error::InvalidSiteDimension(site_dim));
        }
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch { expected, found: matrix.nrows().max(matrix.ncols()) });
        }
        let hermitian = linalg::antihermitian_deviation(&matrix) <= HERMITIAN_TOL * linalg::frobenius(&matrix);
        Ok(Self { volume, site_dim, matrix, hermitian })
    }

    /// Like [`new`](Self::new) but insists on Hermiticity and removes the
    /// anti-Hermitian rounding noise.
    pub fn hermitian(volume: Volume, site_dim: usize, matrix: CMatrix) -> Result<Self> {
        let op = Self::new(volume, site_dim, matrix)?;
        if !op.hermitian {
            let deviation = linalg::antihermitian_deviation(&op.matrix) / linalg::frobenius(&op.matrix);
            return Err(Error::NotHermitian { deviation });
        }
        Ok(op.symmetrized())
    }

    pub(crate) fn from_parts(volume: Volume, site_dim: usize, matrix: CMatrix, hermitian: bool) -> Self {
        Self { volume, site_dim, matrix, hermitian }
    }

    pub fn zero(volume: Volume, site_dim: usize, cap: DimensionCap) -> Result<Self> {
        let dim = volume.hilbert_dim(site_dim, cap)?;
        Ok(Self::from_parts(volume, site_dim, CMatrix::zeros(dim, dim), true))
    }

    pub fn identity(volume: Volume, site_dim: usize, cap: DimensionCap) -> Result<Self> {
        let dim = volume.hilbert_dim(site_dim, cap)?;
        Ok(Self::from_parts(volume, site_dim, CMatrix::identity(dim, dim), true))
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    /// Hilbert-space dimension `dim^|Λ|`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    fn symmetrized(mut self) -> Self {
        self.matrix = linalg::hermitian_part(&self.matrix);
        self.hermitian = true;
        self
    }

    fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            Ok(())
        } else {
            let deviation = linalg::antihermitian_deviation(&self.matrix) / linalg::frobenius(&self.matrix);
            Err(Error::NotHermitian { deviation })
        }
    }

    fn check_compatible(&self, other: &LatticeOperator) -> Result<()> {
        if self.volume != other.volume || self.site_dim != other.site_dim {
            return Err(Error::VolumeMismatch);
        }
        Ok(())
    }

    /// `A ⊗ 1` on `target`, with tensor factors in the target's site order.
    pub fn embed(&self, target: &Volume) -> Result<LatticeOperator> {
        self.embed_capped(target, DimensionCap(usize::MAX))
    }

    pub fn embed_capped(&self, target: &Volume, cap: DimensionCap) -> Result<LatticeOperator> {
        if !self.volume.is_subset_of(target) {
            return Err(Error::SupportNotContained);
        }
        if &self.volume == target {
            return Ok(self.clone());
        }
        let dim = target.hilbert_dim(self.site_dim, cap)?;
        let mut m = CMatrix::zeros(dim, dim);
        accumulate_embedded(&mut m, target, self.site_dim, &self.volume, &self.matrix, ONE)?;
        Ok(Self::from_parts(target.clone(), self.site_dim, m, self.hermitian))
    }

    /// Partial trace over the sites outside `keep` (unnormalized).
    pub fn partial_trace(&self, keep: &Volume) -> Result<LatticeOperator> {
        if !keep.is_subset_of(&self.volume) {
            return Err(Error::SupportNotContained);
        }
        if keep == &self.volume {
            return Ok(self.clone());
        }
        let (inside, rest) = split_positions(keep, &self.volume)?;
        let n = self.volume.len();
        let loc = offsets(self.site_dim, n, &inside);
        let env = offsets(self.site_dim, n, &rest);
        let m = &self.matrix;
        let out = CMatrix::from_fn(loc.len(), loc.len(), |i, j| {
            let (oi, oj) = (loc[i], loc[j]);
            env.iter().map(|&e| m[(oi + e, oj + e)]).sum()
        });
        Ok(Self::from_parts(keep.clone(), self.site_dim, out, self.hermitian))
    }

    /// `A ⊗ B` on the union of two disjoint volumes.
    pub fn tensor(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        if self.site_dim != other.site_dim {
            return Err(Error::VolumeMismatch);
        }
        if self.volume.intersects(&other.volume) {
            return Err(Error::InvalidVolume("tensor factors must have disjoint supports".into()));
        }
        let union = self.volume.union(&other.volume)?;
        let a = self.embed(&union)?;
        let b = other.embed(&union)?;
        let mut out = a.mul(&b)?;
        out.hermitian = self.hermitian && other.hermitian;
        Ok(out)
    }

    pub fn add(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.check_compatible(other)?;
        let m = &self.matrix + &other.matrix;
        Ok(Self::from_parts(self.volume.clone(), self.site_dim, m, self.hermitian && other.hermitian))
    }

    pub fn sub(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.check_compatible(other)?;
        let m = &self.matrix - &other.matrix;
        Ok(Self::from_parts(self.volume.clone(), self.site_dim, m, self.hermitian && other.hermitian))
    }

    pub fn scale(&self, c: f64) -> LatticeOperator {
        Self::from_parts(self.volume.clone(), self.site_dim, &self.matrix * C64::new(c, 0.0), self.hermitian)
    }

    pub fn scale_complex(&self, c: C64) -> LatticeOperator {
        let hermitian = self.hermitian && c.im == 0.0;
        Self::from_parts(self.volume.clone(), self.site_dim, &self.matrix * c, hermitian)
    }

    /// `A + c·1`.
    pub fn shift(&self, c: f64) -> LatticeOperator {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += C64::new(c, 0.0);
        }
        Self::from_parts(self.volume.clone(), self.site_dim, m, self.hermitian)
    }

    pub fn mul(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.check_compatible(other)?;
        let m = linalg::matmul(&self.matrix, &other.matrix);
        Self::new(self.volume.clone(), self.site_dim, m)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        self.check_compatible(other)?;
        let m = linalg::matmul(&self.matrix, &other.matrix) - linalg::matmul(&other.matrix, &self.matrix);
        Ok(Self::from_parts(self.volume.clone(), self.site_dim, m, false))
    }

    pub fn adjoint(&self) -> LatticeOperator {
        Self::from_parts(self.volume.clone(), self.site_dim, self.matrix.adjoint(), self.hermitian)
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    /// `Tr(A B)`.
    pub fn trace_product(&self, other: &LatticeOperator) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(linalg::trace_product(&self.matrix, &other.matrix))
    }

    /// Largest singular value (`max |λ|` for Hermitian operators).
    pub fn operator_norm(&self) -> f64 {
        if self.hermitian {
            let v = linalg::eigvalsh(&self.matrix);
            v[0].abs().max(v[v.len() - 1].abs())
        } else {
            linalg::operator_norm(&self.matrix)
        }
    }

    /// Eigenvalues (ascending) of a Hermitian operator.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        Ok(linalg::eigvalsh(&self.matrix))
    }

    pub fn eigensystem(&self) -> Result<Eigensystem> {
        self.require_hermitian()?;
        Ok(Eigensystem::hermitian(&self.matrix))
    }

    /// Spectral calculus `f(A) = U f(D) U†` for Hermitian `A`.
    pub fn apply(&self, f: MatrixFunction) -> Result<LatticeOperator> {
        let eig = self.eigensystem()?;
        self.apply_with(&eig, f)
    }

    /// As [`apply`](Self::apply) with a precomputed eigensystem of `self`.
    pub fn apply_with(&self, eig: &Eigensystem, f: MatrixFunction) -> Result<LatticeOperator> {
        let m = apply_spectral(eig, f)?;
        Ok(Self::from_parts(self.volume.clone(), self.site_dim, m, true))
    }

    /// Largest absolute entry of `A − B`.
    pub fn max_abs_diff(&self, other: &LatticeOperator) -> Result<f64> {
        self.check_compatible(other)?;
        Ok((&self.matrix - &other.matrix).iter().map(|c| c.norm()).fold(0.0, f64::max))
    }
}

/// Smallest eigenvalue accepted as "nonnegative".
pub(crate) const CLAMP_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted by `log`.
pub(crate) const LOG_FLOOR: f64 = 1e-300;

pub(crate) fn apply_spectral(eig: &Eigensystem, f: MatrixFunction) -> Result<CMatrix> {
    let min = eig.min();
    match f {
        MatrixFunction::Exp => Ok(eig.map(f64::exp)),
        MatrixFunction::Log => {
            if min <= LOG_FLOOR {
                return Err(Error::NonPositiveSpectrum { min });
            }
            Ok(eig.map(f64::ln))
        }
        MatrixFunction::Power(p) => {
            let integer = p.fract() == 0.0 && p >= 0.0;
            if !integer && min < -CLAMP_TOL {
                return Err(Error::NonPositiveSpectrum { min });
            }
            if p < 0.0 && min <= LOG_FLOOR {
                return Err(Error::NonPositiveSpectrum { min });
            }
            Ok(eig.map(|x| {
                let x = if !integer && x < 0.0 { 0.0 } else { x };
                if p == 0.0 {
                    1.0
                } else {
                    x.powf(p)
                }
            }))
        }
    }
}
