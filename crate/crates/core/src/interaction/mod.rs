//! Translation-invariant finite-range interactions and the operators they
//! generate on finite volumes.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::lattice::{DimensionCap, Point, Volume};
use crate::linalg::{self, ONE};
use crate::operator::{accumulate_embedded, LatticeOperator, HERMITIAN_TOL};
use crate::prelude::*;

mod equivalence;
mod families;

pub use equivalence::{
    default_probes, hamiltonian_density_difference, physically_equivalent, DensityDifference, Equivalence, Probe,
};
pub use families::InteractionFamily;

/// A finite subset of `Z^d` in normal form: its lexicographically smallest
/// point is the origin.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetShape {
    points: Vec<Point>,
}

impl SubsetShape {
    /// Shape from points already in normal form.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        points.sort();
        points.dedup();
        let first = points.first().ok_or_else(|| Error::InvalidParameter("empty shape".into()))?;
        if !first.is_origin() {
            return Err(Error::InvalidParameter(format!("shape minimum {first:?} is not the origin")));
        }
        let d = first.dimension();
        if d == 0 || points.iter().any(|p| p.dimension() != d) {
            return Err(Error::InvalidParameter("shape points have inconsistent dimensions".into()));
        }
        Ok(Self { points })
    }

    /// Translates an arbitrary finite set into normal form.
    pub fn normalized(points: Vec<Point>) -> Result<Self> {
        let min = points.iter().min().ok_or_else(|| Error::InvalidParameter("empty shape".into()))?.clone();
        Self::new(points.iter().map(|p| p.sub(&min)).collect())
    }

    /// The one-point shape `{0}` in `Z^d`.
    pub fn single(dimension: usize) -> Self {
        Self { points: vec![Point::origin(dimension)] }
    }

    /// `{0, 1, …, len-1}` in `Z`.
    pub fn segment(len: usize) -> Self {
        Self { points: (0..len as i64).map(Point::at).collect() }
    }

    /// `{0, e_axis}` in `Z^d`.
    pub fn bond(dimension: usize, axis: usize) -> Self {
        let mut e = vec![0; dimension];
        e[axis] = 1;
        Self { points: vec![Point::origin(dimension), Point::new(e)] }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].dimension()
    }

    /// Largest ℓ¹ distance between two points.
    pub fn diameter(&self) -> i64 {
        let mut d = 0;
        for a in &self.points {
            for b in &self.points {
                d = d.max(a.l1_distance(b));
            }
        }
        d
    }

    /// The shape translated by `x`, as a volume.
    pub fn at(&self, x: &Point) -> Volume {
        let sites = self.points.iter().map(|p| p.add(x)).collect();
        Volume::from_sites(self.dimension(), sites).expect("translate of a valid shape")
    }
}

impl core::fmt::Debug for SubsetShape {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_set().entries(&self.points).finish()
    }
}

/// Translation-invariant finite-range interaction `Φ`.
///
/// One Hermitian term is stored per shape `X ∈ F_0`; the interaction assigns
/// `Φ(X + x)` = the same matrix acting on the translated sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    site_dim: usize,
    dimension: usize,
    terms: BTreeMap<SubsetShape, CMatrix>,
}

impl Interaction {
    /// The zero interaction.
    pub fn new(site_dim: usize, dimension: usize) -> Result<Self> {
        if site_dim < 2 {
            return Err(Error::InvalidSiteDimension(site_dim));
        }
        if dimension == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be positive".into()));
        }
        Ok(Self { site_dim, dimension, terms: BTreeMap::new() })
    }

    /// Adds `matrix` to the term of `shape` (tensor factors in the shape's
    /// point order).
    pub fn add_term(&mut self, shape: SubsetShape, matrix: CMatrix) -> Result<()> {
        if shape.dimension() != self.dimension {
            return Err(Error::InteractionMismatch);
        }
        let expected = crate::lattice::checked_dim(self.site_dim, shape.len())
            .ok_or(Error::InvalidParameter("term support too large".into()))?;
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch { expected, found: matrix.nrows().max(matrix.ncols()) });
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let frob = linalg::frobenius(&matrix);
        let dev = linalg::antihermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL * frob {
            return Err(Error::NotHermitian { deviation: dev / frob });
        }
        let matrix = linalg::hermitian_part(&matrix);
        match self.terms.get_mut(&shape) {
            Some(existing) => *existing += matrix,
            None => {
                self.terms.insert(shape, matrix);
            }
        }
        Ok(())
    }

    pub fn with_term(mut self, shape: SubsetShape, matrix: CMatrix) -> Result<Self> {
        self.add_term(shape, matrix)?;
        Ok(self)
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Stored terms, one per shape, in shape order.
    pub fn terms(&self) -> impl Iterator<Item = (&SubsetShape, &CMatrix)> {
        self.terms.iter()
    }

    pub fn term(&self, shape: &SubsetShape) -> Option<&CMatrix> {
        self.terms.get(shape)
    }

    fn nonzero_terms(&self) -> impl Iterator<Item = (&SubsetShape, &CMatrix)> {
        self.terms.iter().filter(|(_, m)| m.iter().any(|c| c.re != 0.0 || c.im != 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.nonzero_terms().next().is_none()
    }

    /// Range `m`: the largest diameter of a shape carrying a nonzero term.
    pub fn range(&self) -> usize {
        self.nonzero_terms().map(|(s, _)| s.diameter() as usize).max().unwrap_or(0)
    }

    pub(crate) fn check_compatible(&self, other: &Interaction) -> Result<()> {
        if self.site_dim != other.site_dim || self.dimension != other.dimension {
            return Err(Error::InteractionMismatch);
        }
        Ok(())
    }

    /// `aΦ + bΨ`.
    pub fn linear_combination(&self, a: f64, other: &Interaction, b: f64) -> Result<Interaction> {
        self.check_compatible(other)?;
        let mut out = self.scaled(a);
        for (shape, m) in &other.terms {
            let m = m * C64::new(b, 0.0);
            match out.terms.get_mut(shape) {
                Some(existing) => *existing += m,
                None => {
                    out.terms.insert(shape.clone(), m);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Interaction) -> Result<Interaction> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Interaction) -> Result<Interaction> {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn scaled(&self, a: f64) -> Interaction {
        let terms = self.terms.iter().map(|(s, m)| (s.clone(), m * C64::new(a, 0.0))).collect();
        Interaction { site_dim: self.site_dim, dimension: self.dimension, terms }
    }

    /// `Φ + c·1` on every site. Physically equivalent to `Φ`.
    pub fn with_onsite_constant(&self, c: f64) -> Interaction {
        let mut out = self.clone();
        let id = CMatrix::identity(self.site_dim, self.site_dim) * C64::new(c, 0.0);
        out.add_term(SubsetShape::single(self.dimension), id).expect("identity term is valid");
        out
    }

    /// `‖Φ‖_r = Σ_{X∋0} e^{r(|X|−1)} ‖Φ(X)‖`.
    ///
    /// Each stored shape has exactly `|X|` translates containing the origin.
    pub fn br_norm(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(s, m)| {
                let n = s.len() as f64;
                n * (r * (n - 1.0)).exp() * linalg::operator_norm(m)
            })
            .sum()
    }

    /// All translates `X + x` of stored shapes with `X + x ⊆ vol`.
    pub fn translates_within<'a>(&'a self, vol: &'a Volume) -> impl Iterator<Item = (Volume, &'a CMatrix)> + 'a {
        self.terms.iter().flat_map(move |(shape, m)| {
            vol.sites().iter().filter_map(move |x| {
                let sites: Vec<Point> = shape.points().iter().map(|p| p.add(x)).collect();
                if sites.iter().all(|p| vol.contains(p)) {
                    Some((shape.at(x), m))
                } else {
                    None
                }
            })
        })
    }

    /// All translates of stored shapes meeting `vol`.
    pub fn translates_meeting(&self, vol: &Volume) -> Vec<(Volume, &CMatrix)> {
        let mut out = Vec::new();
        for (shape, m) in &self.terms {
            let mut shifts = BTreeSet::new();
            for p in shape.points() {
                for v in vol.sites() {
                    shifts.insert(v.sub(p));
                }
            }
            for x in shifts {
                out.push((shape.at(&x), m));
            }
        }
        out
    }

    /// `H_Λ(Φ) = Σ_{X⊆Λ} Φ(X)`, open boundary conditions.
    pub fn local_hamiltonian(&self, vol: &Volume, cap: DimensionCap) -> Result<LatticeOperator> {
        self.check_volume(vol)?;
        let dim = vol.hilbert_dim(self.site_dim, cap)?;
        let mut m = CMatrix::zeros(dim, dim);
        for (support, term) in self.translates_within(vol) {
            accumulate_embedded(&mut m, vol, self.site_dim, &support, term, ONE)?;
        }
        Ok(LatticeOperator::from_parts(vol.clone(), self.site_dim, m, true))
    }

    fn check_volume(&self, vol: &Volume) -> Result<()> {
        if vol.dimension() != self.dimension {
            return Err(Error::VolumeMismatch);
        }
        Ok(())
    }

    /// Terms crossing the boundary of `vol`: `X ∩ Λ ≠ ∅`, `X ⊄ Λ`.
    fn crossing_terms(&self, vol: &Volume) -> Vec<(Volume, &CMatrix)> {
        self.translates_meeting(vol).into_iter().filter(|(x, _)| !x.is_subset_of(vol)).collect()
    }

    /// Surface energy `W_Λ(Φ)` as an operator on `ambient`.
    ///
    /// Every crossing term must fit inside `ambient`, otherwise the margin is
    /// too small and `W` would be truncated.
    pub fn surface_energy(&self, vol: &Volume, ambient: &Volume, cap: DimensionCap) -> Result<LatticeOperator> {
        self.check_volume(vol)?;
        self.check_volume(ambient)?;
        if !vol.is_subset_of(ambient) {
            return Err(Error::SupportNotContained);
        }
        let crossing = self.crossing_terms(vol);
        if crossing.iter().any(|(x, _)| !x.is_subset_of(ambient)) {
            return Err(Error::MarginTooSmall);
        }
        let dim = ambient.hilbert_dim(self.site_dim, cap)?;
        let mut m = CMatrix::zeros(dim, dim);
        for (support, term) in &crossing {
            accumulate_embedded(&mut m, ambient, self.site_dim, support, term, ONE)?;
        }
        Ok(LatticeOperator::from_parts(ambient.clone(), self.site_dim, m, true))
    }

    /// `Λ` together with every site of a term crossing its boundary.
    pub fn surface_support(&self, vol: &Volume) -> Result<Volume> {
        let mut sites: BTreeSet<Point> = vol.sites().iter().cloned().collect();
        for (x, _) in self.crossing_terms(vol) {
            sites.extend(x.sites().iter().cloned());
        }
        Volume::from_sites(vol.dimension(), sites.into_iter().collect())
    }

    /// `‖W_Λ(Φ)‖`, evaluated on the smallest volume carrying `W_Λ`.
    pub fn surface_energy_norm(&self, vol: &Volume, cap: DimensionCap) -> Result<f64> {
        let support = self.surface_support(vol)?;
        Ok(self.surface_energy(vol, &support, cap)?.operator_norm())
    }

    /// ℓ¹ ball of radius `range` around `center`.
    pub fn ball(&self, center: &Point) -> Volume {
        ball(self.dimension, self.range() as i64, center)
    }

    /// Specific energy observable `E_Φ = Σ_{X∋0} Φ(X)/|X|`, on the ball of
    /// radius `range` around the origin.
    pub fn specific_energy_observable(&self) -> Result<LatticeOperator> {
        let origin = Point::origin(self.dimension);
        let ball = self.ball(&origin);
        let dim = ball.hilbert_dim(self.site_dim, DimensionCap(usize::MAX))?;
        let mut m = CMatrix::zeros(dim, dim);
        for (shape, term) in self.nonzero_terms() {
            let weight = C64::new(1.0 / shape.len() as f64, 0.0);
            for p in shape.points() {
                let support = shape.at(&p.neg());
                accumulate_embedded(&mut m, &ball, self.site_dim, &support, term, weight)?;
            }
        }
        Ok(LatticeOperator::from_parts(ball, self.site_dim, m, true))
    }

    /// `E_Φ` translated to `x`.
    pub fn energy_density_at(&self, x: &Point) -> Result<LatticeOperator> {
        let e = self.specific_energy_observable()?;
        let vol = e.volume().translated(x);
        Ok(LatticeOperator::from_parts(vol, self.site_dim, e.into_matrix(), true))
    }
}

pub(crate) fn ball(dimension: usize, radius: i64, center: &Point) -> Volume {
    let corner = Point::new(center.coords().iter().map(|c| c - radius).collect());
    let cube = Volume::box_at(&corner, (2 * radius + 1) as usize).expect("valid box");
    if dimension == 1 {
        // intervals keep their side length
        return cube;
    }
    let sites = cube.sites().iter().filter(|p| p.l1_distance(center) <= radius).cloned().collect();
    Volume::from_sites(dimension, sites).expect("ball is nonempty")
}
