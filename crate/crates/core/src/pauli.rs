//! Spin-1/2 single-site matrices.
//!
//! Basis order is `|↑⟩ = |0⟩, |↓⟩ = |1⟩`, so `σ^z = diag(1, −1)`.

use crate::linalg::{CMatrix, C64};

const O: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);
const R: C64 = C64::new(1.0, 0.0);

pub fn identity() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, R, R, O])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, -I, I, O])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[R, O, O, -R])
}

/// `|0⟩⟨1|`, which lowers `σ^z` from −1 to +1. Under Jordan–Wigner this is the
/// on-site fermion annihilator (occupied = `|1⟩`).
pub fn lowering() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, R, O, O])
}

/// `|1⟩⟨0|`.
pub fn raising() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, O, R, O])
}

/// `|0⟩⟨0|`.
pub fn projector_up() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[R, O, O, O])
}

/// `|1⟩⟨1| = (1 − σ^z)/2`.
pub fn projector_down() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[O, O, O, R])
}

/// Matrix unit `|i⟩⟨j|` of dimension `dim`.
pub fn matrix_unit(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = R;
    m
}
