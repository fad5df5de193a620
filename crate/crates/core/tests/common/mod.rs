#![allow(dead_code)]

use latticetherm_core::{CMatrix, DensityMatrix, DimensionCap, LatticeOperator, Point, Volume, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random Hermitian matrix with operator norm `norm`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, norm: f64) -> CMatrix {
    let g = random_matrix(rng, dim, dim);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let ev = h.clone().symmetric_eigenvalues();
    let scale = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    h * C64::new(norm / scale, 0.0)
}

/// `G G† / Tr` with `G` of random rank between 1 and `dim`.
pub fn random_state(rng: &mut impl Rng, vol: &Volume) -> DensityMatrix {
    let dim = vol.hilbert_dim(2, DimensionCap::default()).unwrap();
    let rank = rng.random_range(1..=dim);
    let g = random_matrix(rng, dim, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = LatticeOperator::hermitian(vol.clone(), 2, m * C64::new(1.0 / tr, 0.0)).unwrap();
    DensityMatrix::new(op).unwrap()
}

/// Random Hermitian operator on one site or one nearest-neighbour pair of
/// `vol`, embedded into `vol`.
pub fn random_local(rng: &mut impl Rng, vol: &Volume, norm: f64) -> LatticeOperator {
    let n = vol.len();
    let x = rng.random_range(0..n);
    let support = if x + 1 < n && rng.random_bool(0.5) {
        Volume::from_sites(1, vec![vol.sites()[x].clone(), vol.sites()[x + 1].clone()]).unwrap()
    } else {
        Volume::site(vol.sites()[x].clone())
    };
    let dim = 1 << support.len();
    LatticeOperator::new(support, 2, random_hermitian(rng, dim, norm)).unwrap().embed(vol).unwrap()
}

pub fn site(x: i64) -> Volume {
    Volume::site(Point::at(x))
}

/// `(1 − eps) a + eps b`.
pub fn mix(a: &DensityMatrix, b: &DensityMatrix, eps: f64) -> DensityMatrix {
    let m = a.op().scale(1.0 - eps).add(&b.op().scale(eps)).unwrap();
    DensityMatrix::new(m).unwrap()
}
