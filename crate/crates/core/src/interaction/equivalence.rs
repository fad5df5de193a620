use alloc::collections::BTreeSet;

use super::Interaction;
use crate::lattice::{DimensionCap, Point, Volume};
use crate::linalg::{self, ONE};
use crate::operator::{accumulate_embedded, LatticeOperator};
use crate::pauli;
use crate::prelude::*;

/// A local observable used to test `Σ_X [Φ(X) − Ψ(X), A] = 0`.
#[derive(Debug, Clone)]
pub struct Probe {
    pub label: String,
    pub op: LatticeOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    /// Every probe commutator was below tolerance; `max_norm` is the largest.
    Equivalent { max_norm: f64 },
    /// The first probe whose commutator exceeded tolerance.
    Inequivalent { witness: String, norm: f64 },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

fn site_label(p: &Point) -> String {
    format!("{p:?}")
}

/// Default probe set.
///
/// Single-site observables at the origin (for spin-1/2 the Pauli matrices
/// σ^z, σ^x, σ^y, then all matrix units `|i⟩⟨j|`), followed by the matrix
/// units on every term support of either interaction. Because `A ↦ Σ[Δ(X), A]`
/// is a derivation, vanishing on the single-site units already implies
/// vanishing on all local observables; the support units are a redundancy check.
pub fn default_probes(phi: &Interaction, psi: &Interaction) -> Result<Vec<Probe>> {
    phi.check_compatible(psi)?;
    let d = phi.site_dim;
    let origin = Point::origin(phi.dimension);
    let site = Volume::site(origin.clone());
    let mut probes = Vec::new();
    if d == 2 {
        for (name, m) in [("sigma_z", pauli::sigma_z()), ("sigma_x", pauli::sigma_x()), ("sigma_y", pauli::sigma_y())] {
            probes.push(Probe {
                label: format!("{name}@{}", site_label(&origin)),
                op: LatticeOperator::new(site.clone(), d, m)?,
            });
        }
    }
    for i in 0..d {
        for j in 0..d {
            probes.push(Probe {
                label: format!("e{i}{j}@{}", site_label(&origin)),
                op: LatticeOperator::new(site.clone(), d, pauli::matrix_unit(d, i, j))?,
            });
        }
    }
    let shapes: BTreeSet<_> = phi.terms.keys().chain(psi.terms.keys()).filter(|s| s.len() > 1).cloned().collect();
    for shape in shapes {
        let support = shape.at(&origin);
        let n = crate::lattice::checked_dim(d, shape.len()).ok_or(Error::InvalidParameter("support too large".into()))?;
        for i in 0..n {
            for j in 0..n {
                probes.push(Probe {
                    label: format!("e{i},{j}@{support:?}"),
                    op: LatticeOperator::new(support.clone(), d, pauli::matrix_unit(n, i, j))?,
                });
            }
        }
    }
    Ok(probes)
}

/// `‖Σ_{X∩S≠∅} [Δ(X), A]‖` for a probe `A` supported on `S`.
fn probe_commutator_norm(delta: &Interaction, probe: &LatticeOperator) -> Result<f64> {
    let support = probe.volume();
    let terms = delta.translates_meeting(support);
    let mut sites: BTreeSet<Point> = support.sites().iter().cloned().collect();
    for (x, _) in &terms {
        sites.extend(x.sites().iter().cloned());
    }
    let vol = Volume::from_sites(delta.dimension, sites.into_iter().collect())?;
    let dim = vol.hilbert_dim(delta.site_dim, DimensionCap::DEFAULT)?;
    let mut h = CMatrix::zeros(dim, dim);
    for (x, m) in &terms {
        accumulate_embedded(&mut h, &vol, delta.site_dim, x, m, ONE)?;
    }
    let a = probe.embed(&vol)?;
    let comm = linalg::matmul(&h, a.matrix()) - linalg::matmul(a.matrix(), &h);
    Ok(linalg::operator_norm(&comm))
}

/// Commutator criterion for physical equivalence of `Φ` and `Ψ`.
pub fn physically_equivalent(phi: &Interaction, psi: &Interaction, probes: &[Probe], tol: f64) -> Result<Equivalence> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("at least one probe is required".into()));
    }
    let delta = phi.sub(psi)?;
    let mut max_norm: f64 = 0.0;
    for probe in probes {
        if probe.op.site_dim() != phi.site_dim || probe.op.volume().dimension() != phi.dimension {
            return Err(Error::InteractionMismatch);
        }
        let norm = probe_commutator_norm(&delta, &probe.op)?;
        if norm > tol {
            return Ok(Equivalence::Inequivalent { witness: probe.label.clone(), norm });
        }
        max_norm = max_norm.max(norm);
    }
    Ok(Equivalence::Equivalent { max_norm })
}

/// One entry of [`hamiltonian_density_difference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDifference {
    pub sites: usize,
    pub value: f64,
}

/// `‖(H_Λ(Φ) − H_Λ(Ψ))/|Λ| − c·1‖` for each volume, with `c` the normalized
/// trace of `E_{Φ−Ψ}`.
pub fn hamiltonian_density_difference(
    phi: &Interaction,
    psi: &Interaction,
    vols: &[Volume],
    cap: DimensionCap,
) -> Result<Vec<DensityDifference>> {
    let delta = phi.sub(psi)?;
    let e = delta.specific_energy_observable()?;
    let c = e.trace().re / e.dim() as f64;
    let mut out = Vec::with_capacity(vols.len());
    for vol in vols {
        let hp = phi.local_hamiltonian(vol, cap)?;
        let hq = psi.local_hamiltonian(vol, cap)?;
        let n = vol.len() as f64;
        let diff = hp.sub(&hq)?.scale(1.0 / n).shift(-c);
        out.push(DensityDifference { sites: vol.len(), value: diff.operator_norm() });
    }
    Ok(out)
}
