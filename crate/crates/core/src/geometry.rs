//! Planar emitter arrays.
//!
//! Coordinates are in units of the transition wavelength, so a period of `0.3`
//! means `0.3 lambda_0`. All arrays lie in the `z = 0` plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest admissible lattice period. Closer emitters would need short-range
/// corrections that the dipole model does not include.
pub const MIN_PERIOD: f64 = 0.1;

/// Tolerance for coordinate comparisons (positions are O(1..10) in lambda units).
pub const POSITION_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("lattice period {0} is at or below the validity floor {MIN_PERIOD}")]
    PeriodTooSmall(f64),
    #[error("array side count {0} is too small (need at least 2)")]
    InvalidSize(usize),
    #[error("{0:?} arrays have no rectangular (n_x, n_y) grid")]
    NotAGrid(LatticeKind),
    #[error("grid index ({n_x}, {n_y}) outside 1..={nx_max} x 1..={ny_max}")]
    IndexOutOfRange { n_x: usize, n_y: usize, nx_max: usize, ny_max: usize },
    #[error("positions {0} and {1} coincide")]
    DuplicatePosition(usize, usize),
    #[error("an array needs at least one emitter")]
    Empty,
}

/// Orientation of the transition dipole moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolarizationTag {
    /// Out-of-plane dipole, `e_d = z`.
    SigmaZ,
    /// In-plane circular dipole, `e_d = (x + i y) / sqrt 2`.
    SigmaPlus,
    /// In-plane circular dipole, `e_d = (x - i y) / sqrt 2`.
    SigmaMinus,
}

impl PolarizationTag {
    /// Unit dipole vector `e_d` as Cartesian components.
    pub fn dipole_vector(self) -> [Complex64; 3] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Self::SigmaZ => [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            Self::SigmaPlus => [Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, 0.0)],
            Self::SigmaMinus => [Complex64::new(s, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, 0.0)],
        }
    }

    /// Projection `e_d^* . E` of a Cartesian field onto the dipole direction.
    pub fn project(self, field: [Complex64; 3]) -> Complex64 {
        let e = self.dipole_vector();
        e.iter().zip(field.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_circular(self) -> bool {
        !matches!(self, Self::SigmaZ)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::SigmaZ => "z",
            Self::SigmaPlus => "plus",
            Self::SigmaMinus => "minus",
        }
    }
}

impl std::str::FromStr for PolarizationTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "sigmaz" | "sigma_z" => Ok(Self::SigmaZ),
            "+" | "plus" | "sigmaplus" | "sigma_plus" => Ok(Self::SigmaPlus),
            "-" | "minus" | "sigmaminus" | "sigma_minus" => Ok(Self::SigmaMinus),
            other => Err(format!("unknown polarization `{other}` (expected z, plus or minus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    /// `N x N` cut of the square lattice, edges along the lattice vectors.
    Square,
    /// Diamond cut of the square lattice: edges run along the lattice diagonals,
    /// `N` atoms per edge, centred on an atom.
    DiagonalSquare,
    /// `N x N_y` cut of a rectangular lattice with periods `a_x`, `a_y`.
    Rectangular,
    /// Triangular cut of the hexagonal (triangular Bravais) lattice, `N` atoms per edge.
    Triangle,
    /// Hexagonal cut of the hexagonal lattice centred on an atom, `N` atoms per edge.
    Hexagon,
}

impl LatticeKind {
    pub fn is_grid(self) -> bool {
        matches!(self, Self::Square | Self::Rectangular)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::Square => "square",
            Self::DiagonalSquare => "diagonal",
            Self::Rectangular => "rectangular",
            Self::Triangle => "triangle",
            Self::Hexagon => "hexagon",
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "square" => Ok(Self::Square),
            "diagonal" | "diagonalsquare" | "diamond" => Ok(Self::DiagonalSquare),
            "rectangular" | "rect" => Ok(Self::Rectangular),
            "triangle" => Ok(Self::Triangle),
            "hexagon" => Ok(Self::Hexagon),
            other => Err(format!("unknown geometry `{other}`")),
        }
    }
}

/// Shape and spacing of a finite array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeDescriptor {
    pub kind: LatticeKind,
    /// Atoms per edge (along `x` for grids).
    pub side_count: usize,
    /// Atoms along `y`; only meaningful for `Rectangular`, equal to `side_count` otherwise.
    pub side_count_y: usize,
    pub period_x: f64,
    pub period_y: f64,
}

impl LatticeDescriptor {
    /// Single-period descriptor for any kind except a non-square `Rectangular`.
    pub fn new(kind: LatticeKind, side_count: usize, period: f64) -> Self {
        Self { kind, side_count, side_count_y: side_count, period_x: period, period_y: period }
    }

    pub fn square(side_count: usize, period: f64) -> Self {
        Self::new(LatticeKind::Square, side_count, period)
    }

    pub fn rectangular(nx: usize, ny: usize, period_x: f64, period_y: f64) -> Self {
        Self { kind: LatticeKind::Rectangular, side_count: nx, side_count_y: ny, period_x, period_y }
    }

    /// Number of emitters the descriptor generates.
    pub fn total_count(&self) -> usize {
        let n = self.side_count;
        match self.kind {
            LatticeKind::Square => n * n,
            LatticeKind::Rectangular => n * self.side_count_y,
            LatticeKind::DiagonalSquare => n * n + (n - 1) * (n - 1),
            LatticeKind::Triangle => n * (n + 1) / 2,
            LatticeKind::Hexagon => 3 * n * n - 3 * n + 1,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for p in [self.period_x, self.period_y] {
            if !(p > MIN_PERIOD) {
                return Err(GeometryError::PeriodTooSmall(p));
            }
        }
        if self.side_count < 2 {
            return Err(GeometryError::InvalidSize(self.side_count));
        }
        if self.kind == LatticeKind::Rectangular && self.side_count_y < 1 {
            return Err(GeometryError::InvalidSize(self.side_count_y));
        }
        Ok(())
    }

    /// Grid dimensions `(N_x, N_y)` for grid geometries.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        match self.kind {
            LatticeKind::Square => Some((self.side_count, self.side_count)),
            LatticeKind::Rectangular => Some((self.side_count, self.side_count_y)),
            _ => None,
        }
    }
}

/// A finite planar array of identical emitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomArray {
    /// `None` for hand-placed clusters built with [`AtomArray::from_positions`].
    pub descriptor: Option<LatticeDescriptor>,
    pub polarization: PolarizationTag,
    positions: Vec<[f64; 2]>,
}

impl AtomArray {
    /// Hand-placed cluster (single atoms, dimers, test fixtures). Only checks that
    /// positions are distinct; the lattice period floor does not apply.
    pub fn from_positions(positions: Vec<[f64; 2]>, polarization: PolarizationTag) -> Result<Self, GeometryError> {
        if positions.is_empty() {
            return Err(GeometryError::Empty);
        }
        for i in 0..positions.len() {
            for j in 0..i {
                let d = distance(positions[i], positions[j]);
                if d < POSITION_EPS {
                    return Err(GeometryError::DuplicatePosition(j, i));
                }
            }
        }
        Ok(Self { descriptor: None, polarization, positions })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_count(&self) -> usize {
        self.positions.len()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.positions.len() as f64;
        let (sx, sy) = self.positions.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        [sx / n, sy / n]
    }

    /// Same sites, different dipole orientation.
    pub fn with_polarization(&self, polarization: PolarizationTag) -> Self {
        Self { polarization, ..self.clone() }
    }

    /// Position index of grid site `(n_x, n_y)`, both 1-based.
    pub fn grid_index(&self, n_x: usize, n_y: usize) -> Result<usize, GeometryError> {
        let (nx, ny) = self.grid_shape()?;
        if n_x == 0 || n_y == 0 || n_x > nx || n_y > ny {
            return Err(GeometryError::IndexOutOfRange { n_x, n_y, nx_max: nx, ny_max: ny });
        }
        Ok((n_y - 1) * nx + (n_x - 1))
    }

    /// Inverse of [`AtomArray::grid_index`].
    pub fn grid_site(&self, index: usize) -> Result<(usize, usize), GeometryError> {
        let (nx, ny) = self.grid_shape()?;
        if index >= nx * ny {
            return Err(GeometryError::IndexOutOfRange { n_x: index % nx + 1, n_y: index / nx + 1, nx_max: nx, ny_max: ny });
        }
        Ok((index % nx + 1, index / nx + 1))
    }

    pub fn grid_shape(&self) -> Result<(usize, usize), GeometryError> {
        match self.descriptor {
            Some(d) => d.grid_shape().ok_or(GeometryError::NotAGrid(d.kind)),
            None => Err(GeometryError::NotAGrid(LatticeKind::Square)),
        }
    }

    /// Smallest pairwise distance (infinite for a single emitter).
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.positions.len() {
            for j in 0..i {
                best = best.min(distance(self.positions[i], self.positions[j]));
            }
        }
        best
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Build the array described by `descriptor`.
///
/// Grid geometries are ordered row-major in `(n_y, n_x)` with atom `(1, 1)` at the
/// origin. Diamond and hexagon cuts are centred on an atom at the origin and ordered
/// by row (`y`) then by `x`; triangles start at the origin corner, ordered the same way.
pub fn generate_array(descriptor: LatticeDescriptor, polarization: PolarizationTag) -> Result<AtomArray, GeometryError> {
    descriptor.validate()?;
    let n = descriptor.side_count;
    let a = descriptor.period_x;
    let mut positions = Vec::with_capacity(descriptor.total_count());
    match descriptor.kind {
        LatticeKind::Square | LatticeKind::Rectangular => {
            let ny = if descriptor.kind == LatticeKind::Square { n } else { descriptor.side_count_y };
            for iy in 0..ny {
                for ix in 0..n {
                    positions.push([ix as f64 * a, iy as f64 * descriptor.period_y]);
                }
            }
        }
        LatticeKind::DiagonalSquare => {
            let r = n as i64 - 1;
            for j in -r..=r {
                let w = r - j.abs();
                for i in -w..=w {
                    positions.push([i as f64 * a, j as f64 * a]);
                }
            }
        }
        LatticeKind::Triangle => {
            let h = a * 3f64.sqrt() / 2.0;
            for row in 0..n {
                for i in 0..(n - row) {
                    positions.push([(i as f64 + row as f64 / 2.0) * a, row as f64 * h]);
                }
            }
        }
        LatticeKind::Hexagon => {
            let r = n as i64 - 1;
            let h = a * 3f64.sqrt() / 2.0;
            for row in -r..=r {
                let lo = (-r).max(-r - row);
                let hi = r.min(r - row);
                for q in lo..=hi {
                    positions.push([(q as f64 + row as f64 / 2.0) * a, row as f64 * h]);
                }
            }
        }
    }
    debug_assert_eq!(positions.len(), descriptor.total_count());
    Ok(AtomArray { descriptor: Some(descriptor), polarization, positions })
}
