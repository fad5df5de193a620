use super::{evolve_observable_complex, EvolutionContext, MAX_GROWTH_EXPONENT};
use crate::linalg::{self, Eigensystem};
use crate::operator::LatticeOperator;
use crate::prelude::*;
use crate::state::DensityMatrix;
use crate::thermo::gibbs_from_hamiltonian;
use nalgebra::DMatrix;

/// Highest order of the expansional series.
pub const MAX_EXPANSIONAL_ORDER: usize = 40;
const TAIL_TOL: f64 = 1e-12;

fn check_pair(h: &LatticeOperator, v: &LatticeOperator) -> Result<()> {
    if h.volume() != v.volume() || h.site_dim() != v.site_dim() {
        return Err(Error::VolumeMismatch);
    }
    Ok(())
}

/// Gibbs state `e^{−(H+V)}/Tr e^{−(H+V)}`.
pub fn perturbed_gibbs(h: &LatticeOperator, v: &LatticeOperator) -> Result<DensityMatrix> {
    check_pair(h, v)?;
    if !v.is_hermitian() {
        let deviation = linalg::antihermitian_deviation(v.matrix()) / linalg::frobenius(v.matrix());
        return Err(Error::NotHermitian { deviation });
    }
    gibbs_from_hamiltonian(&h.add(v)?, 1.0)
}

/// Smallest `n` with `x^n/n! < 1e-12`.
fn truncation_order(x: f64) -> usize {
    let mut term = 1.0;
    let mut n = 0;
    while term >= TAIL_TOL {
        n += 1;
        term *= x / n as f64;
        if n > MAX_EXPANSIONAL_ORDER {
            break;
        }
    }
    n
}

/// Chebyshev–Lobatto nodes `u_j = (1 − cos(πj/M))/2` on `[0, 1]` and the
/// matrix `S` with `Σ_j S_ij f(u_j) ≈ ∫_0^{u_i} f`.
fn integration_matrix(m: usize) -> (Vec<f64>, DMatrix<f64>) {
    use core::f64::consts::PI;
    let nodes: Vec<f64> = (0..=m).map(|j| (1.0 - (PI * j as f64 / m as f64).cos()) / 2.0).collect();
    // T_k(x_i) at x_i = −cos(πi/M), for k ≤ M + 1
    let t = |k: usize, i: usize| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * (PI * (i * k) as f64 / m as f64).cos()
    };
    let mut s = DMatrix::zeros(m + 1, m + 1);
    for j in 0..=m {
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        let mut a: Vec<f64> = (0..=m).map(|k| 2.0 / m as f64 * w * t(k, j)).collect();
        a[0] /= 2.0;
        a[m] /= 2.0;
        a.extend([0.0, 0.0]);
        let mut b = vec![0.0; m + 2];
        b[1] = a[0] - a[2] / 2.0;
        for k in 2..=m + 1 {
            b[k] = (a[k - 1] - a[k + 1]) / (2.0 * k as f64);
        }
        let at_start: f64 = b.iter().enumerate().map(|(k, bk)| if k % 2 == 0 { *bk } else { -*bk }).sum();
        for i in 0..=m {
            let f: f64 = b.iter().enumerate().map(|(k, bk)| bk * t(k, i)).sum();
            s[(i, j)] = (f - at_start) / 2.0;
        }
    }
    (nodes, s)
}

/// The Araki–Dyson expansional `E_V(z) = Σ_n (iz)^n G_n(1)`, where `G_0 = 1`
/// and `G_n(s) = ∫_0^s G_{n−1}(u) α^{zu}(V) du`.
///
/// Each `G_n` is tabulated on Chebyshev nodes and integrated spectrally in the
/// eigenbasis of `H`. The series is cut at the first `n` with
/// `(‖V‖|z|)^n/n! < 1e-12`; orders above 40 are refused.
pub fn expansional(h: &LatticeOperator, v: &LatticeOperator, z: C64) -> Result<LatticeOperator> {
    check_pair(h, v)?;
    let dim = h.dim();
    let identity = || LatticeOperator::identity(h.volume().clone(), h.site_dim(), crate::DimensionCap(usize::MAX));
    let v_norm = v.operator_norm();
    if z.norm() == 0.0 || v_norm == 0.0 {
        return identity();
    }
    let order = truncation_order(v_norm * z.norm());
    if order > MAX_EXPANSIONAL_ORDER {
        return Err(Error::TruncationNotConverged { needed: order, max_order: MAX_EXPANSIONAL_ORDER });
    }
    let eig = h.eigensystem()?;
    let width = eig.max() - eig.min();
    let exponent = width * z.im.abs();
    if exponent > MAX_GROWTH_EXPONENT {
        return Err(Error::OverflowRisk { exponent });
    }
    let e = eig.values();
    let vt = eig.to_eigenbasis(v.matrix());
    let m = 40.max((2.0 * z.norm() * width).ceil() as usize + 40);
    let (nodes, s) = integration_matrix(m);
    let iz = C64::new(0.0, 1.0) * z;
    let alpha: Vec<CMatrix> = nodes
        .iter()
        .map(|&u| CMatrix::from_fn(dim, dim, |j, k| vt[(j, k)] * (iz * u * (e[j] - e[k])).exp()))
        .collect();

    let mut g: Vec<CMatrix> = vec![CMatrix::identity(dim, dim); m + 1];
    let mut total = CMatrix::identity(dim, dim);
    let mut coeff = C64::new(1.0, 0.0);
    for _ in 1..=order {
        let products: Vec<CMatrix> = g.iter().zip(&alpha).map(|(gi, ai)| linalg::matmul(gi, ai)).collect();
        for (i, gi) in g.iter_mut().enumerate() {
            gi.fill(C64::new(0.0, 0.0));
            for (j, p) in products.iter().enumerate() {
                let w = s[(i, j)];
                if w != 0.0 {
                    *gi += p * C64::new(w, 0.0);
                }
            }
        }
        coeff *= iz;
        total += &g[m] * coeff;
    }
    let out = eig.from_eigenbasis(&total);
    LatticeOperator::new(h.volume().clone(), h.site_dim(), out)
}

/// `e^{iz(H+V)} e^{−izH}` from two diagonalizations.
pub fn expansional_closed_form(h: &LatticeOperator, v: &LatticeOperator, z: C64) -> Result<LatticeOperator> {
    check_pair(h, v)?;
    let hv = h.add(v)?;
    let a = hv.eigensystem()?;
    let b = h.eigensystem()?;
    for eig in [&a, &b] {
        let exponent = eig.spectral_radius() * z.im.abs();
        if exponent > MAX_GROWTH_EXPONENT {
            return Err(Error::OverflowRisk { exponent });
        }
    }
    let iz = C64::new(0.0, 1.0) * z;
    let exp = |eig: &Eigensystem, c: C64| eig.map_complex(|x| (c * x).exp());
    let m = linalg::matmul(&exp(&a, iz), &exp(&b, -iz));
    LatticeOperator::new(h.volume().clone(), h.site_dim(), m)
}

/// Constants and positivity margins of `D_V ω ≤ ω_V ≤ C_V ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichBounds {
    /// `exp(‖V‖ + ‖α^{i/2}(V)‖)`, dynamics of `H`.
    pub c_v: f64,
    /// `exp(−‖V‖ − ‖α^{i/2}(V)‖)`, dynamics of `H − V`.
    pub d_v: f64,
    /// `λ_min(C_V ω − ω_V)`.
    pub upper_margin: f64,
    /// `λ_min(ω_V − D_V ω)`.
    pub lower_margin: f64,
}

/// Compares `ω = Gibbs(H)` with `ω_V = Gibbs(H + V)`.
pub fn sandwich_bounds(h: &LatticeOperator, v: &LatticeOperator) -> Result<SandwichBounds> {
    let omega_v = perturbed_gibbs(h, v)?;
    let omega = gibbs_from_hamiltonian(h, 1.0)?;
    let half = C64::new(0.0, 0.5);
    let v_norm = v.operator_norm();
    let forward = evolve_observable_complex(v, &EvolutionContext::new(h.clone())?, half)?;
    let backward = evolve_observable_complex(v, &EvolutionContext::new(h.sub(v)?)?, half)?;
    let c_v = (v_norm + forward.operator_norm()).exp();
    let d_v = (-v_norm - backward.operator_norm()).exp();
    let upper = omega.op().scale(c_v).sub(omega_v.op())?;
    let lower = omega_v.op().sub(&omega.op().scale(d_v))?;
    Ok(SandwichBounds {
        c_v,
        d_v,
        upper_margin: linalg::eigvalsh(upper.matrix())[0],
        lower_margin: linalg::eigvalsh(lower.matrix())[0],
    })
}
