//! Coupled-dipole scattering of structured beams.
//!
//! Dipole amplitudes solve `(d_omega I - M) x = kappa E_par` with
//! `kappa = -3 / (4 k0^3)`, which is `d = alpha (E_0 + sum 4 pi k0^2 G d)` in
//! normalized form; the resonances sit exactly at the eigenvalues of `M`.
//! Cross sections use the optical theorem and are reported in units of
//! `sigma_0 = 3 lambda_0^2 / (2 pi)`.

pub mod beam;
pub mod quadrature;

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::AtomArray;
use crate::hamiltonian::{build_hamiltonian, EffectiveHamiltonian};
use crate::spectrum::{bilinear, diagonalize, CollectiveState, Irrep, SpectrumError};
use crate::units::{K0, SIGMA_SINGLE};
pub use beam::{BeamError, BeamParams, BesselBeam};

/// Drive constant tying the linear system to the single-atom polarizability.
pub const DRIVE: f64 = -3.0 / (4.0 * K0 * K0 * K0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error(transparent)]
    Beam(#[from] BeamError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("linear solve failed at detuning {detuning}: relative residual {residual:.3e}")]
    SolveFailure { detuning: f64, residual: f64 },
    #[error("eigenbasis is defective at state {index}: bilinear norm {norm:.3e}")]
    DefectiveBasis { index: usize, norm: f64 },
    #[error("invalid detuning grid: {0}")]
    InvalidGrid(String),
}

/// Two-level polarizability `-(3 / (2 k0^3)) (1/2) / (d_omega + i/2)` in `lambda_0^3`.
pub fn polarizability(detuning: f64) -> Complex64 {
    -(3.0 / (2.0 * K0 * K0 * K0)) * 0.5 / Complex64::new(detuning, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IncidentField {
    Bessel(BesselBeam),
    /// Uniform field of fixed polarization, as for normal incidence.
    PlaneWave { polarization: [Complex64; 3], amplitude: f64 },
}

impl IncidentField {
    pub fn sample(&self, x: f64, y: f64) -> Result<[Complex64; 3], ScatteringError> {
        match self {
            IncidentField::Bessel(b) => Ok(b.field(x, y)?),
            IncidentField::PlaneWave { polarization, amplitude } => Ok(polarization.map(|c| c * *amplitude)),
        }
    }

    /// `|E_0|^2` entering the optical theorem: the peak of `|E_z|^2` for a beam.
    pub fn reference_intensity(&self) -> f64 {
        match self {
            IncidentField::Bessel(b) => (b.peak_ez * b.params.amplitude).powi(2),
            IncidentField::PlaneWave { polarization, amplitude } => {
                amplitude * amplitude * polarization.iter().map(|c| c.norm_sqr()).sum::<f64>()
            }
        }
    }
}

/// `e_d^* . E_0(r_j)` for every atom.
pub fn projected_drive(array: &AtomArray, field: &IncidentField) -> Result<Vec<Complex64>, ScatteringError> {
    let pol = array.polarization;
    array.positions().par_iter().map(|p| Ok(pol.project(field.sample(p[0], p[1])?))).collect()
}

/// Dipole amplitudes at one real detuning.
pub fn solve_coupled_dipoles(
    h: &EffectiveHamiltonian,
    drive: &[Complex64],
    detuning: f64,
) -> Result<Vec<Complex64>, ScatteringError> {
    let n = h.dim();
    let m = h.matrix();
    let a = Mat::from_fn(n, n, |i, j| if i == j { detuning - m[(i, j)] } else { -m[(i, j)] });
    let rhs = Mat::from_fn(n, 1, |i, _| DRIVE * drive[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    let sol: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    let rhs_norm = (0..n).map(|i| rhs[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
    let res = (0..n)
        .map(|i| {
            let ax: Complex64 = (0..n).map(|j| a[(i, j)] * sol[j]).sum();
            (ax - rhs[(i, 0)]).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    if !(res <= 1e-10 * rhs_norm.max(f64::MIN_POSITIVE)) {
        return Err(ScatteringError::SolveFailure { detuning, residual: res / rhs_norm });
    }
    Ok(sol)
}

/// Extinction cross section in `lambda_0^2`.
pub fn total_cross_section(amplitudes: &[Complex64], drive: &[Complex64], reference_intensity: f64) -> f64 {
    let s: f64 = amplitudes.iter().zip(drive).map(|(x, e)| (x * e.conj()).im).sum();
    4.0 * PI * K0 * s / reference_intensity
}

/// Eigenvectors rescaled to unit bilinear norm, made bilinear-orthogonal
/// inside each degenerate multiplet.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    vectors: Vec<Vec<Complex64>>,
}

impl ModalBasis {
    pub fn new(states: &[CollectiveState], degeneracy_tol: f64) -> Result<Self, ScatteringError> {
        let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(states.len());
        let mut cluster_start = 0;
        for (n, st) in states.iter().enumerate() {
            if n > 0 && (st.eigenvalue() - states[n - 1].eigenvalue()).norm() >= degeneracy_tol {
                cluster_start = n;
            }
            let mut u = st.amplitudes.clone();
            for phi in &vectors[cluster_start..n] {
                let proj = bilinear(phi, &u);
                u.iter_mut().zip(phi).for_each(|(a, b)| *a -= proj * b);
            }
            let norm = bilinear(&u, &u);
            let herm: f64 = u.iter().map(|c| c.norm_sqr()).sum();
            if norm.norm() < 1e-10 * herm.max(f64::MIN_POSITIVE) || herm < 1e-20 {
                return Err(ScatteringError::DefectiveBasis { index: n, norm: norm.norm() });
            }
            let scale = norm.sqrt().inv();
            u.iter_mut().for_each(|c| *c *= scale);
            vectors.push(u);
        }
        Ok(Self { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, n: usize) -> &[Complex64] {
        &self.vectors[n]
    }

    /// Expansion coefficients `c_n = phi_n^T x`.
    pub fn coefficients(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.vectors.iter().map(|phi| bilinear(phi, x)).collect()
    }
}

/// Per-mode cross sections in `lambda_0^2`; they sum to the total.
pub fn modal_cross_sections(
    amplitudes: &[Complex64],
    basis: &ModalBasis,
    drive: &[Complex64],
    reference_intensity: f64,
) -> Vec<f64> {
    basis
        .coefficients(amplitudes)
        .iter()
        .zip(&basis.vectors)
        .map(|(c, phi)| {
            let s: f64 = phi.iter().zip(drive).map(|(p, e)| (c * p * e.conj()).im).sum();
            4.0 * PI * K0 * s / reference_intensity
        })
        .collect()
}

/// Total and modal cross sections over a detuning grid, in units of `sigma_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSpectrum {
    pub detunings: Vec<f64>,
    pub total: Vec<f64>,
    /// `modal[n][g]` for state `n` (spectrum order) at grid point `g`.
    pub modal: Vec<Vec<f64>>,
    pub mode_detuning: Vec<f64>,
    pub mode_decay: Vec<f64>,
    pub mode_irrep: Vec<Irrep>,
    pub mode_dominant: Vec<Option<(usize, usize)>>,
    /// Normalization: single atom on resonance at the peak of `|E_z|`.
    pub sigma0: f64,
}

impl ScatteringSpectrum {
    /// Largest `|sum_n sigma_n - sigma_tot| / sigma_tot` over the grid.
    pub fn sum_rule_error(&self) -> f64 {
        (0..self.detunings.len())
            .map(|g| {
                let s: f64 = self.modal.iter().map(|m| m[g]).sum();
                (s - self.total[g]).abs() / self.total[g].abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// Maximum of `sigma_n` over the grid, located by parabolic refinement.
    pub fn modal_peak(&self, n: usize) -> ModalPeak {
        let curve = &self.modal[n];
        let g = (0..curve.len()).max_by(|&a, &b| curve[a].total_cmp(&curve[b])).unwrap_or(0);
        let mut center = self.detunings[g];
        if g > 0 && g + 1 < curve.len() {
            let (x0, x1, x2) = (self.detunings[g - 1], self.detunings[g], self.detunings[g + 1]);
            let (y0, y1, y2) = (curve[g - 1], curve[g], curve[g + 1]);
            let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
            let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
            let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
            if a < 0.0 {
                let v = -b / (2.0 * a);
                if v > x0 && v < x2 {
                    center = v;
                }
            }
        }
        ModalPeak { mode: n, center, height: curve[g] }
    }

    /// Among modes with `decay < max_decay`, the one whose `sigma_n` peak is highest.
    pub fn largest_narrow_peak(&self, max_decay: f64) -> Option<ModalPeak> {
        (0..self.modal.len())
            .filter(|&n| self.mode_decay[n] < max_decay)
            .map(|n| self.modal_peak(n))
            .max_by(|a, b| a.height.total_cmp(&b.height))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModalPeak {
    pub mode: usize,
    pub center: f64,
    pub height: f64,
}

/// Uniform grid on `range` plus, for each state narrower than `max_decay`,
/// `points` samples across `+-width` decay rates around its detuning.
pub fn detuning_grid(
    range: (f64, f64),
    uniform: usize,
    states: &[CollectiveState],
    max_decay: f64,
    width: f64,
    points: usize,
) -> Result<Vec<f64>, ScatteringError> {
    let (lo, hi) = range;
    if !(lo < hi) || uniform < 2 {
        return Err(ScatteringError::InvalidGrid(format!("range ({lo}, {hi}) with {uniform} points")));
    }
    let mut grid: Vec<f64> = (0..uniform).map(|i| lo + (hi - lo) * i as f64 / (uniform - 1) as f64).collect();
    for st in states.iter().filter(|s| s.decay < max_decay && s.detuning > lo && s.detuning < hi) {
        let half = width * st.decay;
        for i in 0..points.max(2) {
            let t = -1.0 + 2.0 * i as f64 / (points.max(2) - 1) as f64;
            let v = st.detuning + t * half;
            if v > lo && v < hi {
                grid.push(v);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * a.abs().max(1.0));
    Ok(grid)
}

/// Full pipeline for one array and one incident field.
pub fn scattering_spectrum(
    array: &AtomArray,
    field: &IncidentField,
    detunings: &[f64],
    states: Option<&[CollectiveState]>,
) -> Result<ScatteringSpectrum, ScatteringError> {
    let h = build_hamiltonian(array);
    let owned;
    let states = match states {
        Some(s) => s,
        None => {
            owned = diagonalize(&h)?;
            &owned
        }
    };
    let basis = ModalBasis::new(states, 1e-6)?;
    let drive = projected_drive(array, field)?;
    let reference = field.reference_intensity();

    let columns: Vec<(f64, Vec<f64>)> = detunings
        .par_iter()
        .map(|&d| {
            let x = solve_coupled_dipoles(&h, &drive, d)?;
            let total = total_cross_section(&x, &drive, reference) / SIGMA_SINGLE;
            let modal = modal_cross_sections(&x, &basis, &drive, reference).into_iter().map(|v| v / SIGMA_SINGLE).collect();
            Ok((total, modal))
        })
        .collect::<Result<_, ScatteringError>>()?;

    let n = states.len();
    let mut modal = vec![Vec::with_capacity(detunings.len()); n];
    let mut total = Vec::with_capacity(detunings.len());
    for (t, m) in columns {
        total.push(t);
        for (k, v) in m.into_iter().enumerate() {
            modal[k].push(v);
        }
    }
    Ok(ScatteringSpectrum {
        detunings: detunings.to_vec(),
        total,
        modal,
        mode_detuning: states.iter().map(|s| s.detuning).collect(),
        mode_decay: states.iter().map(|s| s.decay).collect(),
        mode_irrep: states.iter().map(|s| s.irrep).collect(),
        mode_dominant: states.iter().map(|s| s.dominant()).collect(),
        sigma0: SIGMA_SINGLE,
    })
}
