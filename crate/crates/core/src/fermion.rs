//! Spinless lattice fermions on one-dimensional intervals, represented on
//! spin-1/2 chains through the Jordan–Wigner transformation
//! `a_x = (∏_{y<x} σ^z_y) s_x` with `s = |0⟩⟨1|`.
//!
//! The occupied orbital is `|1⟩`, so `n_x = a†_x a_x = (1 − σ^z_x)/2`.

use crate::interaction::{Interaction, SubsetShape};
use crate::lattice::{DimensionCap, Point, Volume};
use crate::linalg::{self, kron};
use crate::operator::LatticeOperator;
use crate::pauli;
use crate::prelude::*;
use crate::state::DensityMatrix;

/// Translation-invariant fermion interaction
///
/// `H = Σ_k t_k Σ_x (a†_x a_{x+k} + h.c.) − μ Σ_x n_x + Σ_k V_k Σ_x n_x n_{x+k}`
///
/// with `k = 1, 2, …` indexing the entries of `hopping` and `density`.
/// A nonzero `pairing` adds `Δ Σ_x (a†_x a†_{x+1} + h.c.)`, which breaks the
/// gauge (particle-number) symmetry and exists only as a diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionInteraction {
    pub hopping: Vec<f64>,
    pub chemical_potential: f64,
    pub density: Vec<f64>,
    pub pairing: f64,
}

fn n_matrix() -> CMatrix {
    pauli::projector_down()
}

impl FermionInteraction {
    pub fn new(hopping: Vec<f64>, chemical_potential: f64, density: Vec<f64>) -> Result<Self> {
        let f = Self { hopping, chemical_potential, density, pairing: 0.0 };
        f.validate()?;
        Ok(f)
    }

    pub fn with_pairing(mut self, pairing: f64) -> Result<Self> {
        self.pairing = pairing;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let all = self.hopping.iter().chain(&self.density).chain([&self.chemical_potential, &self.pairing]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("fermion couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.pairing == 0.0
    }

    /// The spin interaction obtained from Jordan–Wigner, term by term.
    ///
    /// `a†_x a_{x+k} = s†_x (∏_{x<y<x+k} σ^z_y) s_{x+k}`, so hopping at distance
    /// `k` is a `(k+1)`-site term with a string in the middle.
    pub fn to_interaction(&self) -> Result<Interaction> {
        let c = |v: f64| C64::new(v, 0.0);
        let mut phi = Interaction::new(2, 1)?;
        phi.add_term(SubsetShape::single(1), n_matrix() * c(-self.chemical_potential))?;
        for (idx, &t) in self.hopping.iter().enumerate() {
            let k = idx + 1;
            let mut hop = pauli::raising();
            for _ in 1..k {
                hop = kron(&hop, &pauli::sigma_z());
            }
            hop = kron(&hop, &pauli::lowering());
            let term = (&hop + hop.adjoint()) * c(t);
            phi.add_term(SubsetShape::segment(k + 1), term)?;
        }
        for (idx, &v) in self.density.iter().enumerate() {
            let k = idx as i64 + 1;
            let shape = SubsetShape::new(vec![Point::at(0), Point::at(k)])?;
            phi.add_term(shape, kron(&n_matrix(), &n_matrix()) * c(v))?;
        }
        if self.pairing != 0.0 {
            let pair = kron(&pauli::raising(), &pauli::raising());
            phi.add_term(SubsetShape::segment(2), (&pair + pair.adjoint()) * c(self.pairing))?;
        }
        Ok(phi)
    }

    /// `L × L` one-body matrix `h` with `H = Σ h_xy a†_x a_y` (gauge-invariant,
    /// density-free part only).
    pub fn one_body_matrix(&self, len: usize) -> nalgebra::DMatrix<f64> {
        let mut h = nalgebra::DMatrix::zeros(len, len);
        for x in 0..len {
            h[(x, x)] = -self.chemical_potential;
            for (idx, &t) in self.hopping.iter().enumerate() {
                let y = x + idx + 1;
                if y < len {
                    h[(x, y)] = t;
                    h[(y, x)] = t;
                }
            }
        }
        h
    }
}

/// Explicit Jordan–Wigner mode operators on an interval.
#[derive(Debug, Clone)]
pub struct FermionModes {
    volume: Volume,
    annihilators: Vec<LatticeOperator>,
}

impl FermionModes {
    pub fn new(vol: &Volume, cap: DimensionCap) -> Result<Self> {
        if vol.dimension() != 1 {
            return Err(Error::DimensionNotSupported(vol.dimension()));
        }
        vol.hilbert_dim(2, cap)?;
        let n = vol.len();
        let mut annihilators = Vec::with_capacity(n);
        for x in 0..n {
            let mut m = CMatrix::identity(1, 1);
            for y in 0..n {
                let factor = match y.cmp(&x) {
                    core::cmp::Ordering::Less => pauli::sigma_z(),
                    core::cmp::Ordering::Equal => pauli::lowering(),
                    core::cmp::Ordering::Greater => pauli::identity(),
                };
                m = kron(&m, &factor);
            }
            annihilators.push(LatticeOperator::new(vol.clone(), 2, m)?);
        }
        Ok(Self { volume: vol.clone(), annihilators })
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn len(&self) -> usize {
        self.annihilators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annihilators.is_empty()
    }

    /// `a_x` for the `x`-th site of the interval.
    pub fn annihilator(&self, x: usize) -> &LatticeOperator {
        &self.annihilators[x]
    }

    pub fn creator(&self, x: usize) -> LatticeOperator {
        self.annihilators[x].adjoint()
    }

    /// `a†_x a_y`.
    pub fn hop(&self, x: usize, y: usize) -> LatticeOperator {
        let m = linalg::matmul(self.creator(x).matrix(), self.annihilators[y].matrix());
        LatticeOperator::new(self.volume.clone(), 2, m).expect("same volume")
    }

    /// `N_Λ = Σ_x a†_x a_x`.
    pub fn number(&self) -> LatticeOperator {
        let dim = self.annihilators[0].dim();
        let mut m = CMatrix::zeros(dim, dim);
        for x in 0..self.len() {
            m += self.hop(x, x).matrix();
        }
        LatticeOperator::hermitian(self.volume.clone(), 2, m).expect("number operator is Hermitian")
    }
}

/// `H_Λ` assembled from explicit mode operators (independent of
/// [`FermionInteraction::to_interaction`]).
pub fn jordan_wigner(fint: &FermionInteraction, vol: &Volume, cap: DimensionCap) -> Result<LatticeOperator> {
    let modes = FermionModes::new(vol, cap)?;
    let n = modes.len();
    let dim = modes.annihilator(0).dim();
    let mut h = CMatrix::zeros(dim, dim);
    let c = |v: f64| C64::new(v, 0.0);
    for x in 0..n {
        h += modes.hop(x, x).matrix() * c(-fint.chemical_potential);
        for (idx, &t) in fint.hopping.iter().enumerate() {
            let y = x + idx + 1;
            if y < n {
                let hop = modes.hop(x, y);
                h += (hop.matrix() + hop.matrix().adjoint()) * c(t);
            }
        }
        for (idx, &v) in fint.density.iter().enumerate() {
            let y = x + idx + 1;
            if y < n {
                h += linalg::matmul(modes.hop(x, x).matrix(), modes.hop(y, y).matrix()) * c(v);
            }
        }
        if fint.pairing != 0.0 && x + 1 < n {
            let pair = linalg::matmul(modes.creator(x).matrix(), modes.creator(x + 1).matrix());
            h += (&pair + pair.adjoint()) * c(fint.pairing);
        }
    }
    LatticeOperator::hermitian(vol.clone(), 2, h)
}

/// The one-body number interaction `N({x}) = a†_x a_x`.
pub fn number_interaction() -> Interaction {
    Interaction::new(2, 1)
        .and_then(|n| n.with_term(SubsetShape::single(1), n_matrix()))
        .expect("number interaction is valid")
}

/// Drift of `Tr(ρ_t N_Λ)` under `H_Λ(fint)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberAudit {
    /// `‖[H_Λ, N_Λ]‖`; zero for gauge-invariant interactions.
    pub commutator_norm: f64,
    pub initial: f64,
    /// `(t, Tr(ρ_t N) − Tr(ρ_0 N))`.
    pub drift: Vec<(f64, f64)>,
}

impl NumberAudit {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().map(|d| d.1.abs()).fold(0.0, f64::max)
    }
}

pub fn number_conservation_audit(
    fint: &FermionInteraction,
    vol: &Volume,
    rho0: &DensityMatrix,
    times: &[f64],
    cap: DimensionCap,
) -> Result<NumberAudit> {
    if rho0.volume() != vol {
        return Err(Error::VolumeMismatch);
    }
    let h = fint.to_interaction()?.local_hamiltonian(vol, cap)?;
    let n = number_interaction().local_hamiltonian(vol, cap)?;
    let commutator_norm = h.commutator(&n)?.operator_norm();
    let ctx = crate::dynamics::EvolutionContext::new(h)?;
    let initial = rho0.expectation(&n)?.re;
    let mut drift = Vec::with_capacity(times.len());
    for &t in times {
        let rho_t = crate::dynamics::evolve_state(rho0, &ctx, t)?;
        drift.push((t, rho_t.expectation(&n)?.re - initial));
    }
    Ok(NumberAudit { commutator_norm, initial, drift })
}
