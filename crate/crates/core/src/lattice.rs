use core::fmt;

use crate::prelude::*;

/// Local Hilbert space of one lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteSpace {
    dim: usize,
}

impl SiteSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSiteDimension(dim));
        }
        Ok(Self { dim })
    }

    pub const fn qubit() -> Self {
        Self { dim: 2 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Upper bound on the Hilbert-space dimension `dim^|Λ|` of any dense operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionCap(pub usize);

impl DimensionCap {
    pub const DEFAULT: DimensionCap = DimensionCap(4096);

    pub fn check(&self, site_dim: usize, sites: usize) -> Result<usize> {
        match checked_dim(site_dim, sites) {
            Some(dim) if dim <= self.0 => Ok(dim),
            Some(dim) => Err(Error::VolumeTooLarge { dim, cap: self.0 }),
            None => Err(Error::VolumeTooLarge { dim: usize::MAX, cap: self.0 }),
        }
    }
}

impl Default for DimensionCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub(crate) fn checked_dim(site_dim: usize, sites: usize) -> Option<usize> {
    let exp = u32::try_from(sites).ok()?;
    site_dim.checked_pow(exp)
}

/// A point of `Z^d`. Ordering is lexicographic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point(coords)
    }

    pub fn origin(dimension: usize) -> Self {
        Point(vec![0; dimension])
    }

    /// One-dimensional point.
    pub fn at(x: i64) -> Self {
        Point(vec![x])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Point {
        Point(self.0.iter().map(|a| -a).collect())
    }

    /// ℓ¹ norm, the lattice norm `|x| = Σ |x_j|`.
    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Point) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A finite set of lattice sites with a fixed (lexicographic) enumeration.
///
/// The enumeration order fixes the tensor-factor order of every operator
/// living on the volume. Boxes (cubes and intervals) also remember their
/// side length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Volume {
    dimension: usize,
    sites: Vec<Point>,
    side: Option<usize>,
}

impl Volume {
    /// Cube of side `side` in `Z^dimension`, centered at the origin.
    ///
    /// Coordinates run over `-⌊L/2⌋ ..= L-1-⌊L/2⌋`; for even sides the cube
    /// leans one site towards negative coordinates.
    pub fn cube(dimension: usize, side: usize) -> Result<Self> {
        let start = -((side / 2) as i64);
        Self::box_at(&Point(vec![start; dimension]), side)
    }

    /// One-dimensional interval `{start, …, start+len-1}`.
    pub fn interval(start: i64, len: usize) -> Result<Self> {
        Self::box_at(&Point::at(start), len)
    }

    /// Box of side `side` whose lexicographically smallest corner is `corner`.
    pub fn box_at(corner: &Point, side: usize) -> Result<Self> {
        let dimension = corner.dimension();
        if dimension == 0 {
            return Err(Error::InvalidVolume("lattice dimension must be positive".into()));
        }
        if side == 0 {
            return Err(Error::InvalidVolume("side length must be positive".into()));
        }
        let count = side
            .checked_pow(dimension as u32)
            .ok_or_else(|| Error::InvalidVolume("box too large".into()))?;
        let mut sites = Vec::with_capacity(count);
        let mut offset = vec![0i64; dimension];
        for _ in 0..count {
            sites.push(Point(corner.0.iter().zip(&offset).map(|(c, o)| c + o).collect()));
            // odometer, last coordinate fastest: lexicographic order
            for k in (0..dimension).rev() {
                offset[k] += 1;
                if offset[k] < side as i64 {
                    break;
                }
                offset[k] = 0;
            }
        }
        Ok(Self { dimension, sites, side: Some(side) })
    }

    /// Arbitrary finite set of sites. Sites are sorted; duplicates are rejected.
    pub fn from_sites(dimension: usize, mut sites: Vec<Point>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidVolume("lattice dimension must be positive".into()));
        }
        if sites.is_empty() {
            return Err(Error::InvalidVolume("volume must contain at least one site".into()));
        }
        if sites.iter().any(|p| p.dimension() != dimension) {
            return Err(Error::InvalidVolume("site of the wrong lattice dimension".into()));
        }
        sites.sort();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidVolume("duplicate site".into()));
        }
        Ok(Self { dimension, sites, side: None })
    }

    /// Single-site volume.
    pub fn site(point: Point) -> Self {
        Self { dimension: point.dimension(), sites: vec![point], side: Some(1) }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Side length for boxes, `None` for general site sets.
    pub fn side(&self) -> Option<usize> {
        self.side
    }

    /// Linear size used for finite-size scaling: the side for boxes,
    /// `|Λ|^{1/d}` otherwise.
    pub fn linear_size(&self) -> f64 {
        match self.side {
            Some(s) => s as f64,
            None => (self.len() as f64).powf(1.0 / self.dimension as f64),
        }
    }

    pub fn position(&self, p: &Point) -> Option<usize> {
        self.sites.binary_search(p).ok()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.position(p).is_some()
    }

    pub fn is_subset_of(&self, other: &Volume) -> bool {
        self.dimension == other.dimension && self.sites.iter().all(|p| other.contains(p))
    }

    pub fn intersects(&self, other: &Volume) -> bool {
        self.sites.iter().any(|p| other.contains(p))
    }

    pub fn union(&self, other: &Volume) -> Result<Volume> {
        if self.dimension != other.dimension {
            return Err(Error::VolumeMismatch);
        }
        let mut sites = self.sites.clone();
        sites.extend(other.sites.iter().filter(|p| !self.contains(p)).cloned());
        Volume::from_sites(self.dimension, sites)
    }

    /// Sites of `self` not in `other`; `None` when nothing is left.
    pub fn difference(&self, other: &Volume) -> Option<Volume> {
        let sites: Vec<Point> = self.sites.iter().filter(|p| !other.contains(p)).cloned().collect();
        if sites.is_empty() {
            None
        } else {
            Some(Volume { dimension: self.dimension, sites, side: None })
        }
    }

    pub fn translated(&self, x: &Point) -> Volume {
        Volume {
            dimension: self.dimension,
            sites: self.sites.iter().map(|p| p.add(x)).collect(),
            side: self.side,
        }
    }

    /// `dim^|Λ|`, or an error above the cap.
    pub fn hilbert_dim(&self, site_dim: usize, cap: DimensionCap) -> Result<usize> {
        cap.check(site_dim, self.len())
    }

    /// Box of side `inner` centered inside this box (offset `⌊(L-ℓ)/2⌋`).
    pub fn centered_window(&self, inner: usize) -> Result<Volume> {
        let side = self
            .side
            .ok_or_else(|| Error::InvalidVolume("windows need a box-shaped ambient".into()))?;
        if inner > side {
            return Err(Error::SupportNotContained);
        }
        let shift = ((side - inner) / 2) as i64;
        let corner = Point(self.sites[0].0.iter().map(|c| c + shift).collect());
        Volume::box_at(&corner, inner)
    }
}

impl fmt::Debug for Volume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Some(s) => write!(f, "Box(d={}, L={}, from {:?})", self.dimension, s, self.sites[0]),
            None => f.debug_list().entries(&self.sites).finish(),
        }
    }
}
