//! Band structure of the infinite rectangular lattice.
//!
//! `C(k) = sum_{R != 0} e_d^* . G(R) . e_d e^{i k . R}` is the same kernel the
//! finite Hamiltonian uses, so a Bloch eigenvalue is `-i/2 - (3 pi / k0) C(k)`:
//! `d_omega = -(3 pi / k0) Re C` and `gamma = 1 + (6 pi / k0) Im C`.
//! Guided modes have `Im C = -k0 / (6 pi)`.

pub mod direct;
pub mod poisson;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::PolarizationTag;
use crate::units::K0;

pub use direct::{dipole_sum_damped_direct, DirectOptions};
pub use poisson::{dipole_sum_poisson_z, PoissonOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("k = ({kx:.6}, {ky:.6}) lies {distance:.3e} from a diffraction anomaly (margin {margin:.3e})")]
    AnomalyProximity { kx: f64, ky: f64, distance: f64, margin: f64 },
    #[error("series not converged: tail bound {tail:.3e} above tolerance {tolerance:.3e} after {terms} terms")]
    TruncationNotConverged { tail: f64, tolerance: f64, terms: usize },
    #[error("damping extrapolation unstable: differences {differences:?}")]
    ExtrapolationUnstable { differences: Vec<f64> },
    #[error("invalid lattice-sum parameters: {0}")]
    InvalidParameters(String),
}

/// Quasi-momentum in units of `1/lambda_0`; the light circle is `|k| = 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub kx: f64,
    pub ky: f64,
}

impl BlochVector {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    pub fn norm(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    /// Equivalent vector in `[-pi/ax, pi/ax) x [-pi/ay, pi/ay)`.
    pub fn reduce(&self, ax: f64, ay: f64) -> Self {
        let fold = |k: f64, a: f64| {
            let g = 2.0 * PI / a;
            k - g * ((k + 0.5 * g) / g).floor()
        };
        Self { kx: fold(self.kx, ax), ky: fold(self.ky, ay) }
    }

    /// True when the reduced vector lies outside the light circle.
    pub fn is_below_light_line(&self, ax: f64, ay: f64) -> bool {
        self.reduce(ax, ay).norm() > K0
    }

    /// The eight images `(+-kx, +-ky)` and `(+-ky, +-kx)`.
    pub fn c4v_images(&self) -> [BlochVector; 8] {
        let (x, y) = (self.kx, self.ky);
        [(x, y), (-x, y), (x, -y), (-x, -y), (y, x), (-y, x), (y, -x), (-y, -x)].map(|(a, b)| BlochVector::new(a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryPoint {
    Gamma,
    X,
    M,
}

impl SymmetryPoint {
    pub fn vector(self, ax: f64, ay: f64) -> BlochVector {
        match self {
            SymmetryPoint::Gamma => BlochVector::new(0.0, 0.0),
            SymmetryPoint::X => BlochVector::new(PI / ax, 0.0),
            SymmetryPoint::M => BlochVector::new(PI / ax, PI / ay),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SymmetryPoint::Gamma => "G",
            SymmetryPoint::X => "X",
            SymmetryPoint::M => "M",
        }
    }
}

impl std::str::FromStr for SymmetryPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "G" | "GAMMA" | "Γ" => Ok(SymmetryPoint::Gamma),
            "X" => Ok(SymmetryPoint::X),
            "M" => Ok(SymmetryPoint::M),
            other => Err(format!("unknown high-symmetry point `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumMethod {
    PoissonZ,
    DampedDirect,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Truncation {
    /// Diffraction orders `m` used along x (Poisson).
    pub m_range: Option<(i64, i64)>,
    /// Largest `n` summed in any series (Poisson).
    pub n_max: Option<usize>,
    /// Damping constants in units of `1/lambda_0` (direct).
    pub etas: Vec<f64>,
    /// Summation radius (direct).
    pub r_max: Option<f64>,
    /// Number of lattice sites summed (direct).
    pub sites: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipoleSum {
    pub value: Complex64,
    pub k: BlochVector,
    pub polarization: PolarizationTag,
    pub method: SumMethod,
    pub truncation: Truncation,
    /// Bound on the absolute error: the series tail (Poisson) or the
    /// extrapolation difference (direct).
    pub error_estimate: f64,
    pub period_x: f64,
    pub period_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub k: BlochVector,
    pub detuning: f64,
    pub decay: f64,
    pub below_light_line: bool,
}

/// Collective shift and decay of the Bloch mode carried by `sum`.
pub fn dispersion_at(sum: &DipoleSum) -> DispersionSample {
    DispersionSample {
        k: sum.k,
        detuning: -(3.0 * PI / K0) * sum.value.re,
        decay: 1.0 + (6.0 * PI / K0) * sum.value.im,
        below_light_line: sum.k.is_below_light_line(sum.period_x, sum.period_y),
    }
}

/// Engine choice and settings for both summation methods.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DispersionOptions {
    pub poisson: PoissonOptions,
    pub direct: DirectOptions,
    /// Use the damped direct sum even for `SigmaZ`.
    pub force_direct: bool,
}

/// `C(k)` by the best available method: Poisson for `SigmaZ`, damped direct otherwise.
pub fn dipole_sum(
    k: BlochVector,
    polarization: PolarizationTag,
    ax: f64,
    ay: f64,
    opts: &DispersionOptions,
) -> Result<DipoleSum, DispersionError> {
    if polarization == PolarizationTag::SigmaZ && !opts.force_direct {
        dipole_sum_poisson_z(k, ax, ay, &opts.poisson)
    } else {
        dipole_sum_damped_direct(k, polarization, ax, ay, &opts.direct)
    }
}

/// Smallest `| |k + G| - k0 |` over reciprocal vectors and smallest
/// `| |k_x + 2 pi m / ax| - k0 |` over rows; zero on a Rayleigh anomaly.
pub fn anomaly_distance(k: BlochVector, ax: f64, ay: f64) -> f64 {
    let r = k.reduce(ax, ay);
    let (gx, gy) = (2.0 * PI / ax, 2.0 * PI / ay);
    let mut best = f64::INFINITY;
    let mx = (K0 / gx).ceil() as i64 + 2;
    let my = (K0 / gy).ceil() as i64 + 2;
    for m in -mx..=mx {
        let kx = r.kx + gx * m as f64;
        best = best.min((kx.abs() - K0).abs());
        for n in -my..=my {
            let ky = r.ky + gy * n as f64;
            best = best.min((kx.hypot(ky) - K0).abs());
        }
    }
    best
}

/// One entry along a band-structure path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathSample {
    Sample { path_coord: f64, sample: DispersionSample },
    /// Skipped because the point sits on (or next to) a diffraction anomaly.
    Gap { path_coord: f64, k: BlochVector },
}

impl PathSample {
    pub fn path_coord(&self) -> f64 {
        match self {
            PathSample::Sample { path_coord, .. } | PathSample::Gap { path_coord, .. } => *path_coord,
        }
    }

    pub fn sample(&self) -> Option<&DispersionSample> {
        match self {
            PathSample::Sample { sample, .. } => Some(sample),
            PathSample::Gap { .. } => None,
        }
    }
}

/// Sample the band along straight segments between high-symmetry points of a
/// square lattice. Each segment contributes `samples_per_segment` points; the
/// final vertex is included once.
pub fn dispersion_path(
    period: f64,
    polarization: PolarizationTag,
    path: &[SymmetryPoint],
    samples_per_segment: usize,
    opts: &DispersionOptions,
) -> Result<Vec<PathSample>, DispersionError> {
    if path.len() < 2 || samples_per_segment == 0 {
        return Err(DispersionError::InvalidParameters("path needs two points and at least one sample per segment".into()));
    }
    let mut points = Vec::new();
    let mut coord = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0].vector(period, period), w[1].vector(period, period));
        let len = (b.kx - a.kx).hypot(b.ky - a.ky);
        for s in 0..samples_per_segment {
            let t = s as f64 / samples_per_segment as f64;
            points.push((coord + t * len, BlochVector::new(a.kx + t * (b.kx - a.kx), a.ky + t * (b.ky - a.ky))));
        }
        coord += len;
    }
    points.push((coord, path[path.len() - 1].vector(period, period)));

    points
        .par_iter()
        .map(|&(path_coord, k)| match dipole_sum(k, polarization, period, period, opts) {
            Ok(sum) => Ok(PathSample::Sample { path_coord, sample: dispersion_at(&sum) }),
            Err(DispersionError::AnomalyProximity { .. }) => Ok(PathSample::Gap { path_coord, k }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Path coordinates where consecutive samples straddle the light line.
pub fn light_line_crossings(samples: &[PathSample]) -> Vec<f64> {
    let valid: Vec<(f64, &DispersionSample)> =
        samples.iter().filter_map(|s| s.sample().map(|d| (s.path_coord(), d))).collect();
    valid
        .windows(2)
        .filter(|w| w[0].1.below_light_line != w[1].1.below_light_line)
        .map(|w| {
            let (c0, c1) = (w[0].0, w[1].0);
            let (r0, r1) = (w[0].1.k.norm() - K0, w[1].1.k.norm() - K0);
            c0 + (c1 - c0) * r0 / (r0 - r1)
        })
        .collect()
}

/// Twenty probe vectors strictly below the light line: five directions in the
/// irreducible wedge times four radii between `1.25 k0` and the zone edge,
/// each mapped to one of the eight C4v images in turn. Probes closer than
/// `margin` to an anomaly are pulled slightly inwards.
pub fn standard_probe_set(period: f64) -> Vec<BlochVector> {
    let edge = PI / period;
    let r_min = 1.25 * K0;
    let margin = 1e-2 * K0;
    let mut probes = Vec::with_capacity(20);
    for (i, angle) in (0..5).map(|i| (i as f64 + 0.5) * (PI / 4.0) / 5.0).enumerate() {
        let r_max = edge / angle.cos();
        for j in 0..4 {
            let image = (4 * i + j) % 8;
            let at = |r: f64| BlochVector::new(r * angle.cos(), r * angle.sin()).c4v_images()[image];
            let mut r = r_min + (r_max - r_min) * (j as f64 + 0.5) / 4.0;
            while anomaly_distance(at(r), period, period) < margin && r > r_min {
                r -= 0.5 * margin;
            }
            probes.push(at(r));
        }
    }
    probes
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatBandOptions {
    /// Finite-difference step along GM as a fraction of `|GM|`.
    pub step: f64,
    /// Coarse scan spacing in period.
    pub scan_step: f64,
    /// Bisection stops when the bracket is narrower than this.
    pub tolerance: f64,
}

impl Default for FlatBandOptions {
    fn default() -> Self {
        Self { step: 0.02, scan_step: 0.01, tolerance: 1e-5 }
    }
}

/// `d^2 (d_omega) / dk^2` along GM at M for a square lattice. The band is even
/// about M, so one one-sided difference suffices.
pub fn curvature_at_m(
    period: f64,
    polarization: PolarizationTag,
    step: f64,
    opts: &DispersionOptions,
) -> Result<f64, DispersionError> {
    let m = SymmetryPoint::M.vector(period, period);
    let t = 1.0 - step;
    let inner = BlochVector::new(t * m.kx, t * m.ky);
    let f0 = dispersion_at(&dipole_sum(m, polarization, period, period, opts)?).detuning;
    let f1 = dispersion_at(&dipole_sum(inner, polarization, period, period, opts)?).detuning;
    let dk = step * m.norm();
    Ok(2.0 * (f1 - f0) / (dk * dk))
}

/// Period at which the band becomes quartic at M (zero curvature along GM),
/// or `None` when the curvature keeps one sign over `range`.
pub fn find_flat_band_period(
    polarization: PolarizationTag,
    range: (f64, f64),
    flat: &FlatBandOptions,
    opts: &DispersionOptions,
) -> Result<Option<f64>, DispersionError> {
    let (lo, hi) = range;
    if !(crate::geometry::MIN_PERIOD < lo && lo < hi && hi < 0.5) {
        return Err(DispersionError::InvalidParameters(format!("search range ({lo}, {hi}) must lie inside (0.1, 0.5)")));
    }
    let steps = ((hi - lo) / flat.scan_step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let curv: Vec<f64> = grid
        .par_iter()
        .map(|&a| curvature_at_m(a, polarization, flat.step, opts))
        .collect::<Result<_, _>>()?;
    let Some(i) = (0..steps).find(|&i| curv[i].signum() != curv[i + 1].signum()) else {
        return Ok(None);
    };
    let (mut a, mut b, mut fa) = (grid[i], grid[i + 1], curv[i]);
    while b - a > flat.tolerance {
        let mid = 0.5 * (a + b);
        let fm = curvature_at_m(mid, polarization, flat.step, opts)?;
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_into_first_zone() {
        let a = 0.3;
        let g = 2.0 * PI / a;
        let k = BlochVector::new(0.4 + 3.0 * g, -0.2 - g);
        let r = k.reduce(a, a);
        assert!((r.kx - 0.4).abs() < 1e-12 && (r.ky + 0.2).abs() < 1e-12);
        let edge = BlochVector::new(PI / a, 0.0).reduce(a, a);
        assert!((edge.kx + PI / a).abs() < 1e-12);
    }

    #[test]
    fn substitution_identities() {
        let base = DipoleSum {
            value: Complex64::new(0.0, -K0 / (6.0 * PI)),
            k: BlochVector::new(3.0 * K0, 0.0),
            polarization: PolarizationTag::SigmaZ,
            method: SumMethod::PoissonZ,
            truncation: Truncation::default(),
            error_estimate: 0.0,
            period_x: 0.3,
            period_y: 0.3,
        };
        let s = dispersion_at(&base);
        assert!(s.decay.abs() < 1e-15 && s.detuning == 0.0);
        let s = dispersion_at(&DipoleSum { value: Complex64::new(0.7, 0.0), ..base.clone() });
        assert_eq!(s.decay, 1.0);
        assert!((s.detuning + 1.5 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn probes_are_guided_and_clear_of_anomalies() {
        for a in [0.28, 0.294, 0.35] {
            let probes = standard_probe_set(a);
            assert_eq!(probes.len(), 20);
            for k in probes {
                assert!(k.norm() >= 1.25 * K0 - 1e-9);
                assert!(anomaly_distance(k, a, a) > 1e-2 * K0 * 0.99);
            }
        }
    }
}
