//! Finite-volume laboratory for translation-invariant quantum lattice systems.
//!
//! The crate builds translation-invariant finite-range interactions on `Z^d`,
//! their local Hamiltonians and surface energies, finite-volume Gibbs states,
//! pressures and entropies, weak-Gibbs certificates, and the quench /
//! time-averaging experiments that compare an equilibrium state of one
//! interaction with its evolution under another.
//!
//! Everything here is dense linear algebra on `dim^|Λ|`-dimensional tensor
//! product spaces, so the practical volume limit is around a dozen spin-1/2
//! sites (see [`DimensionCap`]).
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. With `std` enabled, matrix products go through the optimized
//! GEMM kernels of `matrixmultiply`.
//!
//! Conventions:
//! - traces are unnormalized matrix traces (`Tr 1 = dim^|Λ|`);
//! - tensor factors follow the lexicographic order of the sites, the first
//!   site being the most significant Kronecker factor;
//! - inverse temperature is absorbed into the interaction unless an explicit
//!   `beta` is passed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod lattice;
mod linalg;
mod operator;
mod state;

pub mod dynamics;
pub mod fermion;
pub mod interaction;
pub mod pauli;
pub mod thermo;

pub use error::{Error, Result};
pub use lattice::{DimensionCap, Point, SiteSpace, Volume};
pub use linalg::{Eigensystem, C64, CMatrix};
pub use operator::{LatticeOperator, MatrixFunction};
pub use state::DensityMatrix;

pub use interaction::{Interaction, InteractionFamily, SubsetShape};

/// Crate-internal imports shared by every module.
///
/// `Float` provides `exp`/`ln`/`sqrt` on `f64` when `std` is off.
#[allow(unused_imports)]
pub(crate) mod prelude {
    pub use alloc::borrow::ToOwned;
    pub use alloc::boxed::Box;
    pub use alloc::string::{String, ToString};
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    pub use alloc::format;
    pub use num_traits::Float;

    pub use crate::error::{Error, Result};
    pub use crate::linalg::{CMatrix, C64};

    /// `exp` and `norm` for complex numbers without `std`. With `std` the
    /// inherent methods of `Complex` are used instead.
    #[cfg(not(feature = "std"))]
    pub trait ComplexMath {
        fn exp(self) -> Self;
        fn norm(self) -> f64;
    }

    #[cfg(not(feature = "std"))]
    impl ComplexMath for C64 {
        fn exp(self) -> Self {
            let r = Float::exp(self.re);
            C64::new(r * Float::cos(self.im), r * Float::sin(self.im))
        }

        fn norm(self) -> f64 {
            Float::hypot(self.re, self.im)
        }
    }
}
