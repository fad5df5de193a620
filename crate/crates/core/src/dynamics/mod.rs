//! Finite-volume dynamics `α^t(A) = e^{itH} A e^{−itH}`, its complex-time
//! continuation, Cesàro time averages and quench experiments.

use crate::interaction::Interaction;
use crate::lattice::{DimensionCap, Volume};
use crate::linalg::{self, Eigensystem};
use crate::operator::LatticeOperator;
use crate::prelude::*;
use crate::state::DensityMatrix;

mod perturbation;
mod quench;

pub use perturbation::{expansional, expansional_closed_form, perturbed_gibbs, sandwich_bounds, SandwichBounds};
pub use quench::{conservation_audit, run_quench, AuditRow, ConservationAudit, QuenchExperiment, QuenchReport, SampleKind, WindowSample};

/// Default bound on `|Im z|` for complex-time evolution.
pub const DEFAULT_IMAG_BOUND: f64 = 2.0;
/// Largest accepted `(spectral width)·|Im z|`.
pub const MAX_GROWTH_EXPONENT: f64 = 200.0;

/// A Hamiltonian with its eigensystem, computed once.
#[derive(Debug, Clone)]
pub struct EvolutionContext {
    hamiltonian: LatticeOperator,
    eig: Eigensystem,
    imag_bound: f64,
}

impl EvolutionContext {
    pub fn new(hamiltonian: LatticeOperator) -> Result<Self> {
        let eig = hamiltonian.eigensystem()?;
        Ok(Self { hamiltonian, eig, imag_bound: DEFAULT_IMAG_BOUND })
    }

    pub fn from_interaction(phi: &Interaction, vol: &Volume, cap: DimensionCap) -> Result<Self> {
        Self::new(phi.local_hamiltonian(vol, cap)?)
    }

    /// Replaces the `|Im z|` bound used by [`evolve_observable_complex`].
    pub fn with_imag_bound(mut self, bound: f64) -> Self {
        self.imag_bound = bound;
        self
    }

    pub fn hamiltonian(&self) -> &LatticeOperator {
        &self.hamiltonian
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn volume(&self) -> &Volume {
        self.hamiltonian.volume()
    }

    /// `E_max − E_min`.
    pub fn spectral_width(&self) -> f64 {
        self.eig.max() - self.eig.min()
    }

    /// Energies closer than this are treated as degenerate when dephasing.
    pub fn degeneracy_tol(&self) -> f64 {
        1e-9 * self.eig.spectral_radius().max(1.0)
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.volume() != self.volume() || rho.site_dim() != self.hamiltonian.site_dim() {
            return Err(Error::VolumeMismatch);
        }
        Ok(())
    }

    /// `e^{−itH}`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.eig.map_complex(|e| C64::new(0.0, -e * t).exp())
    }

    /// `M ↦ U (M̃ ∘ F) U†` where `M̃ = U† M U` is given and
    /// `F_jk = f(E_j − E_k)`.
    pub(crate) fn reweighted(&self, in_eigenbasis: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
        let e = self.eig.values();
        let n = e.len();
        let w = CMatrix::from_fn(n, n, |j, k| in_eigenbasis[(j, k)] * f(e[j] - e[k]));
        self.eig.from_eigenbasis(&w)
    }
}

/// `ρ_t = e^{−itH} ρ e^{itH}`. The spectrum of `ρ` is carried over and its
/// eigenvectors are propagated, so no new diagonalization is needed.
pub fn evolve_state(rho: &DensityMatrix, ctx: &EvolutionContext, t: f64) -> Result<DensityMatrix> {
    ctx.check(rho)?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let v = ctx.propagator(t);
    let m = linalg::matmul(&v, &linalg::matmul(rho.matrix(), &v.adjoint()));
    let vectors = linalg::matmul(&v, rho.eigenvectors());
    let op = LatticeOperator::from_parts(rho.volume().clone(), rho.site_dim(), linalg::hermitian_part(&m), true);
    Ok(DensityMatrix::from_raw(op, rho.eigenvalues().to_vec(), vectors))
}

/// `α^t(A) = e^{itH} A e^{−itH}`.
pub fn evolve_observable(a: &LatticeOperator, ctx: &EvolutionContext, t: f64) -> Result<LatticeOperator> {
    evolve_observable_complex(a, ctx, C64::new(t, 0.0))
}

/// `α^z(A) = e^{izH} A e^{−izH}` for complex `z`, computed entrywise in the
/// eigenbasis as `Ã_jk e^{iz(E_j − E_k)}`.
pub fn evolve_observable_complex(a: &LatticeOperator, ctx: &EvolutionContext, z: C64) -> Result<LatticeOperator> {
    let a = embed_into(a, ctx)?;
    let exponent = ctx.spectral_width() * z.im.abs();
    if z.im.abs() > ctx.imag_bound || exponent > MAX_GROWTH_EXPONENT {
        return Err(Error::OverflowRisk { exponent });
    }
    if z == C64::new(0.0, 0.0) {
        return Ok(a);
    }
    let at = ctx.eig.to_eigenbasis(a.matrix());
    let iz = C64::new(0.0, 1.0) * z;
    let m = ctx.reweighted(&at, |d| (iz * d).exp());
    LatticeOperator::new(a.volume().clone(), a.site_dim(), m)
}

fn embed_into(a: &LatticeOperator, ctx: &EvolutionContext) -> Result<LatticeOperator> {
    if a.site_dim() != ctx.hamiltonian.site_dim() {
        return Err(Error::VolumeMismatch);
    }
    a.embed(ctx.volume())
}

/// How `(1/T)∫_0^T ρ_t dt` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CesaroMethod {
    /// Trapezoid rule on `points` equally spaced times (including both ends).
    /// `None` picks `⌈10·width·T⌉ + 1`, i.e. steps with `width·Δt ≤ 0.1`.
    Trapezoid { points: Option<usize> },
    /// Closed-form dephasing: coherences between energies `E_j ≠ E_k` are
    /// multiplied by `(e^{−iΔT} − 1)/(−iΔT)`, `Δ = E_j − E_k`.
    ExactDephasing,
}

/// Time-averaging factor of a coherence at gap `d`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Averaging {
    Trapezoid { horizon: f64, points: usize },
    Exact { horizon: f64 },
    Infinite,
}

impl Averaging {
    pub(crate) fn new(method: CesaroMethod, ctx: &EvolutionContext, horizon: f64) -> Result<Self> {
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("averaging horizon must be positive, got {horizon}")));
        }
        Ok(match method {
            CesaroMethod::Trapezoid { points } => {
                let points = points.unwrap_or_else(|| (10.0 * ctx.spectral_width() * horizon).ceil() as usize + 1);
                if points < 2 {
                    return Err(Error::InvalidParameter("the trapezoid rule needs at least 2 points".into()));
                }
                Averaging::Trapezoid { horizon, points }
            }
            CesaroMethod::ExactDephasing => Averaging::Exact { horizon },
        })
    }

    pub(crate) fn factor(&self, d: f64, tol: f64) -> C64 {
        if d.abs() <= tol {
            return C64::new(1.0, 0.0);
        }
        match *self {
            Averaging::Infinite => C64::new(0.0, 0.0),
            Averaging::Exact { horizon } => dephasing_factor(d * horizon),
            Averaging::Trapezoid { horizon, points } => trapezoid_factor(d * horizon / (points - 1) as f64, points),
        }
    }
}

/// `(1/x)∫_0^x e^{−is} ds = (e^{−ix} − 1)/(−ix)`.
fn dephasing_factor(x: f64) -> C64 {
    if x.abs() < 1e-4 {
        // 1 − ix/2 − x²/6 + ix³/24
        return C64::new(1.0 - x * x / 6.0, -x / 2.0 + x * x * x / 24.0);
    }
    (C64::new(0.0, -x).exp() - 1.0) / C64::new(0.0, -x)
}

/// Trapezoid average of `e^{−iθm}` over `m = 0..n-1`:
/// `(Σ_m e^{−iθm} − (1 + e^{−iθ(n−1)})/2)/(n − 1)`.
fn trapezoid_factor(theta: f64, n: usize) -> C64 {
    let last = C64::new(0.0, -theta * (n - 1) as f64).exp();
    let half = (theta / 2.0).sin();
    let sum = if half.abs() > 1e-8 {
        // Dirichlet kernel
        C64::new(0.0, -theta * (n - 1) as f64 / 2.0).exp() * ((n as f64 * theta / 2.0).sin() / half)
    } else {
        (0..n).map(|m| C64::new(0.0, -theta * m as f64).exp()).sum()
    };
    (sum - (1.0 + last) * 0.5) / (n - 1) as f64
}

/// The Cesàro-averaged operator `(1/T)∫_0^T ρ_t dt`.
pub(crate) fn averaged_operator(rho_in_eigenbasis: &CMatrix, ctx: &EvolutionContext, avg: Averaging) -> CMatrix {
    let tol = ctx.degeneracy_tol();
    ctx.reweighted(rho_in_eigenbasis, |d| avg.factor(d, tol))
}

fn state_from(volume: &Volume, site_dim: usize, m: CMatrix) -> Result<DensityMatrix> {
    let op = LatticeOperator::from_parts(volume.clone(), site_dim, linalg::hermitian_part(&m), true);
    DensityMatrix::new(op)
}

/// Cesàro average `ω̄_T = (1/T)∫_0^T ρ_t dt`.
pub fn cesaro_average(rho0: &DensityMatrix, ctx: &EvolutionContext, horizon: f64, method: CesaroMethod) -> Result<DensityMatrix> {
    ctx.check(rho0)?;
    let avg = Averaging::new(method, ctx, horizon)?;
    let m = averaged_operator(&ctx.eig.to_eigenbasis(rho0.matrix()), ctx, avg);
    state_from(rho0.volume(), rho0.site_dim(), m)
}

/// Cesàro average restricted to `keep`, without diagonalizing the full
/// averaged state.
pub fn cesaro_average_reduced(
    rho0: &DensityMatrix,
    ctx: &EvolutionContext,
    horizon: f64,
    method: CesaroMethod,
    keep: &Volume,
) -> Result<DensityMatrix> {
    ctx.check(rho0)?;
    let avg = Averaging::new(method, ctx, horizon)?;
    let m = averaged_operator(&ctx.eig.to_eigenbasis(rho0.matrix()), ctx, avg);
    reduce(rho0, m, keep)
}

fn reduce(rho0: &DensityMatrix, m: CMatrix, keep: &Volume) -> Result<DensityMatrix> {
    let full = LatticeOperator::from_parts(rho0.volume().clone(), rho0.site_dim(), m, true);
    let part = full.partial_trace(keep)?;
    state_from(keep, rho0.site_dim(), part.into_matrix())
}

/// `T → ∞` limit: the block-diagonal part of `ρ_0` in the energy eigenbasis.
pub fn diagonal_ensemble(rho0: &DensityMatrix, ctx: &EvolutionContext) -> Result<DensityMatrix> {
    ctx.check(rho0)?;
    let m = averaged_operator(&ctx.eig.to_eigenbasis(rho0.matrix()), ctx, Averaging::Infinite);
    state_from(rho0.volume(), rho0.site_dim(), m)
}
