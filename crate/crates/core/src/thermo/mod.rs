//! Gibbs states, pressures, entropies and the finite-volume variational
//! principle.

use crate::interaction::Interaction;
use crate::lattice::{DimensionCap, Volume};
use crate::linalg::{self, Eigensystem};
use crate::operator::LatticeOperator;
use crate::prelude::*;
use crate::state::{entropy_of, DensityMatrix};

mod certificate;
mod extrapolate;

pub use certificate::{
    regularity_defect, weak_gibbs_certificate, CertificateRecord, ExactGibbs, RegularityRecord, StateFamily,
    WeakGibbsCertificate, WindowedGibbs,
};
pub use extrapolate::{extrapolate, ExtrapolationReport, Trend};

/// Eigenvalues below this are treated as outside the support of a state.
pub const SUPPORT_TOL: f64 = 1e-12;

/// `e^{−βH}/Tr e^{−βH}` together with `log Tr e^{−βH}`.
///
/// The eigensystem of `H` is reused as the state's eigensystem.
pub fn gibbs_with_pressure(h: &LatticeOperator, eig: &Eigensystem, beta: f64) -> Result<(DensityMatrix, f64)> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    let e = eig.values();
    let log_z = linalg::log_sum_exp(e.iter().map(|&x| -beta * x));
    let weights: Vec<f64> = e.iter().map(|&x| (-beta * x - log_z).exp()).collect();
    let state = DensityMatrix::from_spectral(h.volume().clone(), h.site_dim(), weights, eig.vectors().clone());
    Ok((state, log_z))
}

/// Gibbs state of a Hamiltonian at inverse temperature `beta`.
pub fn gibbs_from_hamiltonian(h: &LatticeOperator, beta: f64) -> Result<DensityMatrix> {
    let eig = h.eigensystem()?;
    Ok(gibbs_with_pressure(h, &eig, beta)?.0)
}

/// Finite-volume Gibbs state `ω^c_{Φ,Λ} = e^{−βH_Λ(Φ)}/Tr e^{−βH_Λ(Φ)}`.
pub fn gibbs_state(phi: &Interaction, vol: &Volume, beta: f64, cap: DimensionCap) -> Result<DensityMatrix> {
    gibbs_from_hamiltonian(&phi.local_hamiltonian(vol, cap)?, beta)
}

/// `P_Λ(Φ) = log Tr e^{−βH_Λ(Φ)}` (not divided by `|Λ|`).
pub fn pressure(phi: &Interaction, vol: &Volume, beta: f64, cap: DimensionCap) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::InvalidParameter("beta must be finite".into()));
    }
    let e = phi.local_hamiltonian(vol, cap)?.eigenvalues()?;
    Ok(linalg::log_sum_exp(e.iter().map(|&x| -beta * x)))
}

/// `S(ρ) = −Tr ρ log ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy()
}

/// `S(ρ|σ) = Tr ρ(log ρ − log σ)`, `+∞` when the support of `ρ` is not
/// contained in the support of `σ`.
///
/// Evaluated in the eigenbasis of `σ`: `Tr ρ log σ = Σ_k log σ_k ⟨v_k|ρ|v_k⟩`.
/// Directions with `σ_k ≤ 1e-12` count as outside the support of `σ`; if
/// `ρ` puts weight above the same threshold on one of them the result is `+∞`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.volume() != sigma.volume() || rho.site_dim() != sigma.site_dim() {
        return Err(Error::VolumeMismatch);
    }
    let v = sigma.eigenvectors();
    let rv = linalg::matmul(rho.matrix(), v);
    let mut cross = 0.0;
    for (k, &q) in sigma.eigenvalues().iter().enumerate() {
        let w: f64 = v.column(k).iter().zip(rv.column(k).iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if q <= SUPPORT_TOL {
            if w > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += w * q.ln();
    }
    let neg_entropy = -entropy_of(rho.eigenvalues());
    Ok((neg_entropy - cross).max(0.0))
}

/// `P_Λ(Φ) − (S(ρ) − Tr ρ H_Λ(Φ))`, which is nonnegative and vanishes only
/// at the Gibbs state.
pub fn variational_gap(rho: &DensityMatrix, phi: &Interaction, cap: DimensionCap) -> Result<f64> {
    let h = phi.local_hamiltonian(rho.volume(), cap)?;
    let e = h.eigenvalues()?;
    let p = linalg::log_sum_exp(e.iter().map(|&x| -x));
    let energy = rho.expectation(&h)?.re;
    Ok(p - (rho.entropy() - energy))
}

/// Per-site thermodynamic quantities of a finite-volume Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoPoint {
    /// Linear size `L` of the volume.
    pub side: f64,
    pub sites: usize,
    pub pressure_per_site: f64,
    pub entropy_per_site: f64,
    pub energy_per_site: f64,
}

pub fn thermo_point(phi: &Interaction, vol: &Volume, beta: f64, cap: DimensionCap) -> Result<ThermoPoint> {
    let h = phi.local_hamiltonian(vol, cap)?;
    let eig = h.eigensystem()?;
    let (state, log_z) = gibbs_with_pressure(&h, &eig, beta)?;
    let e: f64 = eig.values().iter().map(|&x| x * (-beta * x - log_z).exp()).sum();
    let n = vol.len() as f64;
    Ok(ThermoPoint {
        side: vol.linear_size(),
        sites: vol.len(),
        pressure_per_site: log_z / n,
        entropy_per_site: state.entropy() / n,
        energy_per_site: e / n,
    })
}
