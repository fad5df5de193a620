//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::prelude::*;

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|c| c.im == 0.0)
}

fn split(m: &CMatrix) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
    let re = m.map(|c| c.re);
    let im = if is_real(m) { None } else { Some(m.map(|c| c.im)) };
    (re, im)
}

fn join(re: DMatrix<f64>, im: Option<DMatrix<f64>>) -> CMatrix {
    match im {
        None => re.map(|x| C64::new(x, 0.0)),
        Some(im) => re.zip_map(&im, C64::new),
    }
}

/// Complex matrix product `a·b`.
///
/// Carried out as (at most four) real products so that the real GEMM kernel
/// does the work; purely real operands skip the imaginary parts.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let rr = &ar * &br;
    match (ai, bi) {
        (None, None) => join(rr, None),
        (Some(ai), None) => join(rr, Some(&ai * &br)),
        (None, Some(bi)) => join(rr, Some(&ar * &bi)),
        (Some(ai), Some(bi)) => {
            let re = rr - &ai * &bi;
            let im = &ar * &bi + &ai * &br;
            join(re, Some(im))
        }
    }
}

/// `u · diag(d) · u†` for real `d`.
pub(crate) fn spectral_sum(u: &CMatrix, d: &[f64]) -> CMatrix {
    let mut scaled = u.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(d[j], 0.0);
    }
    matmul(&scaled, &u.adjoint())
}

/// `u · diag(d) · u†` for complex `d`.
pub(crate) fn spectral_sum_complex(u: &CMatrix, d: &[C64]) -> CMatrix {
    let mut scaled = u.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[j];
    }
    matmul(&scaled, &u.adjoint())
}

/// `u† a u`.
pub(crate) fn to_basis(u: &CMatrix, a: &CMatrix) -> CMatrix {
    matmul(&u.adjoint(), &matmul(a, u))
}

/// `u a u†`.
pub(crate) fn from_basis(u: &CMatrix, a: &CMatrix) -> CMatrix {
    matmul(u, &matmul(a, &u.adjoint()))
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Frobenius norm of `m - m†`.
pub(crate) fn antihermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `Tr(a b)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Spectral decomposition `M = U diag(λ) U†` of a Hermitian matrix, with the
/// eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Eigensystem {
    /// Diagonalizes the Hermitian part of `m`.
    pub fn hermitian(m: &CMatrix) -> Self {
        let h = hermitian_part(m);
        let (values, vectors) = if is_real(&h) {
            let eig = SymmetricEigen::new(h.map(|c| c.re));
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
        } else {
            let eig = SymmetricEigen::new(h);
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
        };
        Self::sorted(values, vectors)
    }

    fn sorted(values: Vec<f64>, vectors: CMatrix) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted_values = order.iter().map(|&k| values[k]).collect();
        let n = vectors.nrows();
        let sorted_vectors = CMatrix::from_fn(n, order.len(), |i, j| vectors[(i, order[j])]);
        Self { values: sorted_values, vectors: sorted_vectors }
    }

    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Orthonormal eigenvectors as columns, matching [`values`](Self::values).
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `max |λ|`, the operator norm of the decomposed matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Spectral calculus `U f(Λ) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        spectral_sum(&self.vectors, &d)
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        spectral_sum_complex(&self.vectors, &d)
    }

    /// `U† a U`, the matrix of `a` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        to_basis(&self.vectors, a)
    }

    /// `U a U†`, back from the eigenbasis.
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        from_basis(&self.vectors, a)
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut values: Vec<f64> = if is_real(&h) {
        h.map(|c| c.re).symmetric_eigenvalues().as_slice().to_vec()
    } else {
        h.symmetric_eigenvalues().as_slice().to_vec()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if antihermitian_deviation(m) <= 1e-14 * frobenius(m) {
        let v = eigvalsh(m);
        return v[0].abs().max(v[v.len() - 1].abs());
    }
    let gram = matmul(&m.adjoint(), m);
    let v = eigvalsh(&gram);
    v[v.len() - 1].max(0.0).sqrt()
}

/// Kronecker product with `a` as the most significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `log(Σ exp(x_i))`, stabilized by the maximum.
pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn naive_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
        CMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
            (0..a.ncols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
        })
    }

    #[test]
    fn matmul_matches_naive_product() {
        let a = CMatrix::from_fn(5, 4, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.3));
        let b = CMatrix::from_fn(4, 3, |i, j| c(0.5 * (i + j) as f64, -(i as f64)));
        let real = a.map(|z| c(z.re, 0.0));
        assert_relative_eq!(frobenius(&(matmul(&a, &b) - naive_mul(&a, &b))), 0.0, epsilon = 1e-12);
        assert_relative_eq!(frobenius(&(matmul(&real, &b) - naive_mul(&real, &b))), 0.0, epsilon = 1e-12);
        assert_relative_eq!(frobenius(&(matmul(&b.transpose(), &real.transpose()) - naive_mul(&b.transpose(), &real.transpose()))), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eigensystem_reconstructs_complex_hermitian() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(2.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(0.0, -1.0), c(1.0, 0.0), c(0.0, 0.2), c(0.5, 0.0), c(0.0, -0.2), c(-1.0, 0.0)],
        );
        let eig = Eigensystem::hermitian(&m);
        assert!(eig.values().windows(2).all(|w| w[0] <= w[1]));
        let back = eig.map(|x| x);
        assert_relative_eq!(frobenius(&(back - &m)), 0.0, epsilon = 1e-12);
        let vals = eigvalsh(&m);
        for (a, b) in vals.iter().zip(eig.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn norm_of_non_normal_matrix() {
        // [[0,1],[0,0]] has singular values {1, 0}
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert_relative_eq!(operator_norm(&m), 1.0, epsilon = 1e-14);
        let h = CMatrix::from_row_slice(2, 2, &[c(-3.0, 0.0), ZERO, ZERO, c(2.0, 0.0)]);
        assert_relative_eq!(operator_norm(&h), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        let xs = [1000.0, 1000.0];
        assert_relative_eq!(log_sum_exp(xs.iter().copied()), 1000.0 + 2f64.ln(), epsilon = 1e-12);
    }
}
