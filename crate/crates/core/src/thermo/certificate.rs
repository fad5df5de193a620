use super::{extrapolate, gibbs_state, gibbs_with_pressure, relative_entropy, ExtrapolationReport};
use crate::interaction::Interaction;
use crate::lattice::{DimensionCap, Volume};
use crate::linalg;
use crate::operator::LOG_FLOOR;
use crate::prelude::*;
use crate::state::DensityMatrix;

/// Supplies a state on each requested volume.
pub trait StateFamily {
    fn state(&self, vol: &Volume) -> Result<DensityMatrix>;
}

impl<F> StateFamily for F
where
    F: Fn(&Volume) -> Result<DensityMatrix>,
{
    fn state(&self, vol: &Volume) -> Result<DensityMatrix> {
        self(vol)
    }
}

/// Finite-volume Gibbs states `ω^c_{Φ,Λ}` of a fixed interaction.
#[derive(Debug, Clone)]
pub struct ExactGibbs {
    pub phi: Interaction,
    pub beta: f64,
    pub cap: DimensionCap,
}

impl StateFamily for ExactGibbs {
    fn state(&self, vol: &Volume) -> Result<DensityMatrix> {
        gibbs_state(&self.phi, vol, self.beta, self.cap)
    }
}

/// Restrictions of one Gibbs state on a large ambient volume.
///
/// Stands in for the local restrictions `ω_Λ` of an infinite-volume
/// equilibrium state.
#[derive(Debug, Clone)]
pub struct WindowedGibbs {
    ambient: DensityMatrix,
}

impl WindowedGibbs {
    pub fn new(phi: &Interaction, ambient: &Volume, beta: f64, cap: DimensionCap) -> Result<Self> {
        Ok(Self { ambient: gibbs_state(phi, ambient, beta, cap)? })
    }

    pub fn from_state(ambient: DensityMatrix) -> Self {
        Self { ambient }
    }

    pub fn ambient(&self) -> &DensityMatrix {
        &self.ambient
    }
}

impl StateFamily for WindowedGibbs {
    fn state(&self, vol: &Volume) -> Result<DensityMatrix> {
        self.ambient.partial_trace(vol)
    }
}

/// Weak-Gibbs constants of one volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRecord {
    pub side: f64,
    pub sites: usize,
    /// `c_Λ = ‖log ω_Λ − log ω^c_{Φ,Λ}‖`.
    pub c: f64,
    /// Extreme eigenvalues of `(ω^c)^{−1/2} ω_Λ (ω^c)^{−1/2}`.
    pub d_lower: f64,
    pub d_upper: f64,
    /// `D_Λ = λ_min(log ω^c − log ω_Λ) = inf_ν [S(ν|ω_Λ) − S(ν|ω^c)]`.
    pub defect: f64,
    /// `λ_min(log ω_Λ − log ω^c)`, to be compared with `−2‖W_Λ‖`.
    pub log_ratio_min: f64,
    /// `‖W_Λ(Φ)‖`.
    pub surface_norm: f64,
}

impl CertificateRecord {
    pub fn per_site(&self) -> f64 {
        self.c / self.sites as f64
    }

    /// `2‖W_Λ‖`.
    pub fn hiai_petz_bound(&self) -> f64 {
        2.0 * self.surface_norm
    }

    /// Violations of the relations every record must satisfy, as messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.c < 0.0 {
            out.push(format!("c = {} < 0", self.c));
        }
        if self.d_lower > 1.0 + 1e-10 || self.d_upper < 1.0 - 1e-10 {
            out.push(format!("ratio bounds {} .. {} do not bracket 1", self.d_lower, self.d_upper));
        }
        if self.defect > self.c + 1e-9 {
            out.push(format!("defect {} exceeds c {}", self.defect, self.c));
        }
        let log_range = self.d_upper.ln().max(-self.d_lower.ln());
        if self.c > log_range + 1e-9 {
            out.push(format!("c {} exceeds max(log d_upper, -log d_lower) = {}", self.c, log_range));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct WeakGibbsCertificate {
    pub records: Vec<CertificateRecord>,
    /// Fit of `c_Λ/|Λ|` against `1/L`; present with three or more volumes.
    pub trend: Option<ExtrapolationReport>,
}

impl WeakGibbsCertificate {
    pub fn per_site(&self) -> Vec<f64> {
        self.records.iter().map(CertificateRecord::per_site).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.per_site().windows(2).all(|w| w[1] < w[0])
    }
}

fn require_faithful(state: &DensityMatrix) -> Result<()> {
    let min = state.min_eigenvalue();
    if min <= LOG_FLOOR {
        return Err(Error::StateNotFaithful { min });
    }
    Ok(())
}

/// Compares `family` with the finite-volume Gibbs states of `phi` on each volume.
pub fn weak_gibbs_certificate(
    phi: &Interaction,
    family: &dyn StateFamily,
    vols: &[Volume],
    cap: DimensionCap,
) -> Result<WeakGibbsCertificate> {
    let mut records = Vec::with_capacity(vols.len());
    for vol in vols {
        let omega = family.state(vol)?;
        if omega.volume() != vol {
            return Err(Error::VolumeMismatch);
        }
        require_faithful(&omega)?;
        let gibbs = gibbs_state(phi, vol, 1.0, cap)?;
        require_faithful(&gibbs)?;

        let diff = omega.log()?.sub(&gibbs.log()?)?;
        let ev = diff.eigenvalues()?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);

        // σ^{-1/2} ρ σ^{-1/2} with σ the Gibbs state
        let inv_sqrt: Vec<f64> = gibbs.eigenvalues().iter().map(|p| 1.0 / p.sqrt()).collect();
        let s = linalg::spectral_sum(gibbs.eigenvectors(), &inv_sqrt);
        let pencil = linalg::matmul(&s, &linalg::matmul(omega.matrix(), &s));
        let ratios = linalg::eigvalsh(&pencil);

        records.push(CertificateRecord {
            side: vol.linear_size(),
            sites: vol.len(),
            c: lo.abs().max(hi.abs()),
            d_lower: ratios[0],
            d_upper: ratios[ratios.len() - 1],
            defect: -hi,
            log_ratio_min: lo,
            surface_norm: phi.surface_energy_norm(vol, cap)?,
        });
    }
    let trend = if records.len() >= 3 {
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.side, r.per_site())).collect();
        Some(extrapolate(&pts)?)
    } else {
        None
    };
    Ok(WeakGibbsCertificate { records, trend })
}

/// One entry of [`regularity_defect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityRecord {
    pub side: f64,
    pub sites: usize,
    /// `S(ν_Λ|ω_Λ)/|Λ|`.
    pub relative_entropy_per_site: f64,
    /// `(−S(ν_Λ) + Tr ν_Λ H_Λ + P_Λ)/|Λ|`.
    pub free_energy_defect_per_site: f64,
    pub defect: f64,
}

/// `|S(ν_Λ|ω_Λ)/|Λ| − (−S(ν_Λ) + Tr ν_Λ H_Λ(Φ) + P_Λ(Φ))/|Λ||` per volume.
pub fn regularity_defect(
    nu: &dyn StateFamily,
    omega: &dyn StateFamily,
    phi: &Interaction,
    vols: &[Volume],
    cap: DimensionCap,
) -> Result<Vec<RegularityRecord>> {
    let mut out = Vec::with_capacity(vols.len());
    for vol in vols {
        let n_state = nu.state(vol)?;
        let o_state = omega.state(vol)?;
        require_faithful(&o_state)?;
        let h = phi.local_hamiltonian(vol, cap)?;
        let eig = h.eigensystem()?;
        let (_, log_z) = gibbs_with_pressure(&h, &eig, 1.0)?;
        let n = vol.len() as f64;
        let rel = relative_entropy(&n_state, &o_state)? / n;
        let free = (-n_state.entropy() + n_state.expectation(&h)?.re + log_z) / n;
        out.push(RegularityRecord {
            side: vol.linear_size(),
            sites: vol.len(),
            relative_entropy_per_site: rel,
            free_energy_defect_per_site: free,
            defect: (rel - free).abs(),
        });
    }
    Ok(out)
}
