use super::{averaged_operator, evolve_state, Averaging, CesaroMethod, EvolutionContext};
use crate::interaction::{self, Interaction};
use crate::lattice::{DimensionCap, Volume};
use crate::linalg;
use crate::operator::LatticeOperator;
use crate::prelude::*;
use crate::state::DensityMatrix;
use crate::thermo::gibbs_state;

/// Prepare `Gibbs(Ψ)` on a cube of side `ambient_side`, evolve it under
/// `H(Φ)` and watch a centered window of side `window_side`.
#[derive(Debug, Clone)]
pub struct QuenchExperiment {
    pub psi: Interaction,
    pub phi: Interaction,
    pub ambient_side: usize,
    pub window_side: usize,
    pub beta: f64,
    /// Snapshot times, strictly increasing and nonnegative.
    pub times: Vec<f64>,
    /// Cesàro horizons, strictly increasing and positive.
    pub horizons: Vec<f64>,
    pub method: CesaroMethod,
    /// Extra one-body observable tracked alongside the energies, typically
    /// the fermion number `a†a`.
    pub number: Option<Interaction>,
    pub cap: DimensionCap,
}

impl QuenchExperiment {
    pub fn new(psi: Interaction, phi: Interaction, ambient_side: usize, window_side: usize) -> Self {
        Self {
            psi,
            phi,
            ambient_side,
            window_side,
            beta: 1.0,
            times: Vec::new(),
            horizons: Vec::new(),
            method: CesaroMethod::ExactDephasing,
            number: None,
            cap: DimensionCap::default(),
        }
    }

    /// Largest interaction range among `Ψ`, `Φ` and the number observable.
    pub fn margin(&self) -> usize {
        let extra = self.number.as_ref().map_or(0, Interaction::range);
        self.psi.range().max(self.phi.range()).max(extra)
    }

    fn validate(&self) -> Result<()> {
        self.psi.check_compatible(&self.phi)?;
        if let Some(n) = &self.number {
            self.psi.check_compatible(n)?;
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        let m = self.margin();
        if self.window_side < 2 * m + 1 {
            return Err(Error::InvalidVolume(format!(
                "window side {} leaves no interior site at range {m}",
                self.window_side
            )));
        }
        if self.window_side + 2 * m > self.ambient_side {
            return Err(Error::MarginTooSmall);
        }
        if self.times.iter().any(|t| *t < 0.0 || !t.is_finite()) || !strictly_increasing(&self.times) {
            return Err(Error::InvalidParameter("times must be finite, nonnegative and strictly increasing".into()));
        }
        if self.horizons.iter().any(|t| *t <= 0.0 || !t.is_finite()) || !strictly_increasing(&self.horizons) {
            return Err(Error::InvalidParameter("horizons must be finite, positive and strictly increasing".into()));
        }
        Ok(())
    }

    pub fn ambient(&self) -> Result<Volume> {
        Volume::cube(self.psi.dimension(), self.ambient_side)
    }

    pub fn window(&self) -> Result<Volume> {
        self.ambient()?.centered_window(self.window_side)
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Which state a [`WindowSample`] was taken from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleKind {
    Initial,
    Time(f64),
    Horizon(f64),
    /// `T → ∞`.
    Diagonal,
}

/// Window observables of one state.
#[derive(Debug, Clone)]
pub struct WindowSample {
    pub kind: SampleKind,
    pub state: DensityMatrix,
    /// Mean of `E_Ψ` over interior window sites.
    pub energy_psi: f64,
    pub energy_phi: f64,
    pub number: Option<f64>,
    /// `S(ρ_window)/|window|`.
    pub entropy_density: f64,
}

#[derive(Debug, Clone)]
pub struct QuenchReport {
    pub ambient: Volume,
    pub window: Volume,
    pub initial: WindowSample,
    pub times: Vec<WindowSample>,
    pub horizons: Vec<WindowSample>,
    pub diagonal: WindowSample,
}

impl QuenchReport {
    /// `(T, ω̄_T(E_Ψ) − ω(E_Ψ))` for every horizon.
    pub fn energy_psi_gain(&self) -> Vec<(f64, f64)> {
        let e0 = self.initial.energy_psi;
        self.horizons
            .iter()
            .filter_map(|s| match s.kind {
                SampleKind::Horizon(t) => Some((t, s.energy_psi - e0)),
                _ => None,
            })
            .collect()
    }

    /// Every sample in emission order: initial, times, horizons, diagonal.
    pub fn samples(&self) -> impl Iterator<Item = &WindowSample> {
        core::iter::once(&self.initial).chain(&self.times).chain(&self.horizons).chain(core::iter::once(&self.diagonal))
    }
}

/// Translated specific-energy observables at every window site whose range
/// ball fits in the window.
struct WindowObservables {
    window: Volume,
    psi: Vec<LatticeOperator>,
    phi: Vec<LatticeOperator>,
    number: Option<Vec<LatticeOperator>>,
}

impl WindowObservables {
    fn new(exp: &QuenchExperiment, window: Volume) -> Result<Self> {
        let m = exp.margin() as i64;
        let d = window.dimension();
        let interior: Vec<_> = window
            .sites()
            .iter()
            .filter(|x| interaction::ball(d, m, x).is_subset_of(&window))
            .cloned()
            .collect();
        let at = |phi: &Interaction| -> Result<Vec<LatticeOperator>> {
            interior.iter().map(|x| phi.energy_density_at(x)).collect()
        };
        Ok(Self {
            psi: at(&exp.psi)?,
            phi: at(&exp.phi)?,
            number: exp.number.as_ref().map(at).transpose()?,
            window,
        })
    }

    fn sample(&self, kind: SampleKind, state: DensityMatrix) -> Result<WindowSample> {
        let mean = |ops: &[LatticeOperator]| -> Result<f64> {
            let mut sum = 0.0;
            for a in ops {
                let v = state.expectation(a)?;
                debug_assert!(v.im.abs() <= 1e-10 * (1.0 + v.re.abs()));
                sum += v.re;
            }
            Ok(sum / ops.len() as f64)
        };
        Ok(WindowSample {
            kind,
            energy_psi: mean(&self.psi)?,
            energy_phi: mean(&self.phi)?,
            number: self.number.as_deref().map(mean).transpose()?,
            entropy_density: state.entropy() / self.window.len() as f64,
            state,
        })
    }

    fn sample_reduced(&self, kind: SampleKind, full: CMatrix, rho0: &DensityMatrix) -> Result<WindowSample> {
        let op = LatticeOperator::from_parts(rho0.volume().clone(), rho0.site_dim(), full, true);
        let part = op.partial_trace(&self.window)?;
        let m = linalg::hermitian_part(part.matrix());
        let state = DensityMatrix::new(LatticeOperator::from_parts(self.window.clone(), rho0.site_dim(), m, true))?;
        self.sample(kind, state)
    }
}

/// Runs the quench and reports window observables for the initial state,
/// every snapshot time, every Cesàro horizon and the diagonal ensemble.
pub fn run_quench(exp: &QuenchExperiment) -> Result<QuenchReport> {
    exp.validate()?;
    let ambient = exp.ambient()?;
    let window = exp.window()?;
    let ctx = EvolutionContext::from_interaction(&exp.phi, &ambient, exp.cap)?;
    let rho0 = gibbs_state(&exp.psi, &ambient, exp.beta, exp.cap)?;
    let obs = WindowObservables::new(exp, window.clone())?;
    let rho_tilde = ctx.eig.to_eigenbasis(rho0.matrix());

    let initial = obs.sample(SampleKind::Initial, rho0.partial_trace(&window)?)?;
    let mut times = Vec::with_capacity(exp.times.len());
    for &t in &exp.times {
        let m = ctx.reweighted(&rho_tilde, |d| C64::new(0.0, -d * t).exp());
        times.push(obs.sample_reduced(SampleKind::Time(t), m, &rho0)?);
    }
    let mut horizons = Vec::with_capacity(exp.horizons.len());
    for &t in &exp.horizons {
        let m = averaged_operator(&rho_tilde, &ctx, Averaging::new(exp.method, &ctx, t)?);
        horizons.push(obs.sample_reduced(SampleKind::Horizon(t), m, &rho0)?);
    }
    let m = averaged_operator(&rho_tilde, &ctx, Averaging::Infinite);
    let diagonal = obs.sample_reduced(SampleKind::Diagonal, m, &rho0)?;
    Ok(QuenchReport { ambient, window, initial, times, horizons, diagonal })
}

/// Drifts at time `t` relative to `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    pub t: f64,
    /// `Tr(ρ_t H(Φ)) − Tr(ρ_0 H(Φ))` on the ambient volume.
    pub energy_drift: f64,
    /// `S(ρ_t) − S(ρ_0)`, with the spectrum of `ρ_t` recomputed from scratch.
    pub entropy_drift: f64,
    /// Change of the window mean of `E_Φ`.
    pub window_energy_drift: f64,
    /// Change of the window entropy per site.
    pub window_entropy_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationAudit {
    pub rows: Vec<AuditRow>,
}

impl ConservationAudit {
    pub fn max_energy_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.energy_drift.abs()).fold(0.0, f64::max)
    }

    pub fn max_entropy_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.entropy_drift.abs()).fold(0.0, f64::max)
    }
}

/// Conservation checks along `exp.times`, using full propagated states.
pub fn conservation_audit(exp: &QuenchExperiment) -> Result<ConservationAudit> {
    exp.validate()?;
    let ambient = exp.ambient()?;
    let window = exp.window()?;
    let ctx = EvolutionContext::from_interaction(&exp.phi, &ambient, exp.cap)?;
    let rho0 = gibbs_state(&exp.psi, &ambient, exp.beta, exp.cap)?;
    let obs = WindowObservables::new(exp, window.clone())?;
    let h = ctx.hamiltonian();
    let e0 = rho0.expectation(h)?.re;
    let s0 = rho0.entropy();
    let w0 = obs.sample(SampleKind::Initial, rho0.partial_trace(&window)?)?;
    let mut rows = Vec::with_capacity(exp.times.len());
    for &t in &exp.times {
        let rho_t = evolve_state(&rho0, &ctx, t)?;
        let spectrum: Vec<f64> = linalg::eigvalsh(rho_t.matrix()).into_iter().map(|p| p.max(0.0)).collect();
        let w = obs.sample(SampleKind::Time(t), rho_t.partial_trace(&window)?)?;
        rows.push(AuditRow {
            t,
            energy_drift: rho_t.expectation(h)?.re - e0,
            entropy_drift: crate::state::entropy_of(&spectrum) - s0,
            window_energy_drift: w.energy_phi - w0.energy_phi,
            window_entropy_drift: w.entropy_density - w0.entropy_density,
        });
    }
    Ok(ConservationAudit { rows })
}
