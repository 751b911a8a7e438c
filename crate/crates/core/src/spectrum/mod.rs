//! Collective eigenstates of the effective Hamiltonian.
//!
//! Eigenvalues are `lambda_j = d_omega_j - i gamma_j / 2` in units of `Gamma_0`.
//! States come back sorted from the most subradiant upwards.

pub mod basis;
pub mod symmetry;

use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::AtomArray;
use crate::hamiltonian::EffectiveHamiltonian;
use basis::decompose;
use symmetry::SiteSymmetry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("eigensolver failed: {0}")]
    EigenSolverFailure(String),
    #[error("state does not match any irrep of {group:?} (characters {characters:?})")]
    UnresolvedIrrep { group: symmetry::PointGroup, characters: Vec<f64> },
    #[error("array has no point-group symmetry to classify against")]
    NoPointGroup,
    #[error(transparent)]
    Basis(#[from] basis::BasisError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Irreducible representation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Irrep {
    A1,
    A2,
    B1,
    B2,
    E,
    Unresolved,
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Irrep::A1 => "A1",
            Irrep::A2 => "A2",
            Irrep::B1 => "B1",
            Irrep::B2 => "B2",
            Irrep::E => "E",
            Irrep::Unresolved => "unresolved",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Irrep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(Irrep::A1),
            "A2" => Ok(Irrep::A2),
            "B1" => Ok(Irrep::B1),
            "B2" => Ok(Irrep::B2),
            "E" => Ok(Irrep::E),
            "UNRESOLVED" => Ok(Irrep::Unresolved),
            other => Err(format!("unknown irrep `{other}`")),
        }
    }
}

/// A standing-wave harmonic and its weight `|c|^2` in a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub mx: usize,
    pub my: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectiveState {
    /// Position in the sorted spectrum (0 = most subradiant).
    pub index: usize,
    /// `d_omega / Gamma_0`.
    pub detuning: f64,
    /// `Gamma / Gamma_0`.
    pub decay: f64,
    /// Unit-norm amplitudes, phase fixed so the largest component is real and positive.
    pub amplitudes: Vec<Complex64>,
    pub irrep: Irrep,
    /// Leading harmonics for grid arrays, empty otherwise.
    pub dominant_harmonics: Vec<Harmonic>,
}

impl CollectiveState {
    /// Complex eigenvalue `d_omega - i gamma / 2`.
    pub fn eigenvalue(&self) -> Complex64 {
        Complex64::new(self.detuning, -0.5 * self.decay)
    }

    pub fn dominant(&self) -> Option<(usize, usize)> {
        self.dominant_harmonics.first().map(|h| (h.mx, h.my))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Eigenvalues closer than this (in `Gamma_0`) form one degenerate multiplet.
    pub degeneracy_tol: f64,
    /// Tolerance on normalized characters.
    pub character_tol: f64,
    /// Number of leading harmonics to keep for grid arrays.
    pub harmonics: usize,
    /// Largest accepted eigen-residual `||M psi - lambda psi||`.
    pub residual_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { degeneracy_tol: 1e-6, character_tol: 1e-4, harmonics: 3, residual_tol: 1e-8 }
    }
}

/// Diagonalize with default options.
pub fn diagonalize(h: &EffectiveHamiltonian) -> Result<Vec<CollectiveState>, SpectrumError> {
    diagonalize_with(h, &SpectrumOptions::default())
}

pub fn diagonalize_with(h: &EffectiveHamiltonian, opts: &SpectrumOptions) -> Result<Vec<CollectiveState>, SpectrumError> {
    let (values, vectors) = eigen_pairs(h.matrix())?;
    let n = values.len();
    for (k, (lambda, v)) in values.iter().zip(&vectors).enumerate() {
        let mv = h.apply(v);
        let res = mv.iter().zip(v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
        if !(res < opts.residual_tol) {
            return Err(SpectrumError::EigenSolverFailure(format!(
                "residual {res:e} for eigenvalue {k} exceeds {:e}",
                opts.residual_tol
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (values[a], values[b]);
        (-la.im).total_cmp(&-lb.im).then(la.re.total_cmp(&lb.re)).then(a.cmp(&b))
    });

    let array = h.array();
    let grid = array.grid_shape().ok();
    let mut states: Vec<CollectiveState> = order
        .iter()
        .enumerate()
        .map(|(index, &k)| {
            let amplitudes = vectors[k].clone();
            let dominant_harmonics = match grid {
                Some((nx, ny)) => leading_harmonics(&amplitudes, nx, ny, opts.harmonics),
                None => Vec::new(),
            };
            CollectiveState {
                index,
                detuning: values[k].re,
                decay: -2.0 * values[k].im,
                amplitudes,
                irrep: Irrep::Unresolved,
                dominant_harmonics,
            }
        })
        .collect();

    if let Some(sym) = SiteSymmetry::for_array(array) {
        label_irreps(&mut states, &sym, opts);
    }
    Ok(states)
}

/// Raw eigenpairs with unit-norm, phase-fixed eigenvectors.
pub(crate) fn eigen_pairs(m: &Mat<Complex64>) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>), SpectrumError> {
    let n = m.nrows();
    let evd = m.eigen().map_err(|e| SpectrumError::EigenSolverFailure(format!("{e:?}")))?;
    let u = evd.U();
    let s = evd.S();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = s[k];
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(SpectrumError::EigenSolverFailure(format!("non-finite eigenvalue {k}")));
        }
        let mut v: Vec<Complex64> = (0..n).map(|i| u[(i, k)]).collect();
        normalize_and_fix_phase(&mut v);
        values.push(lambda);
        vectors.push(v);
    }
    Ok((values, vectors))
}

/// Unit Euclidean norm; the largest-magnitude component (lowest index on ties
/// within 1e-9) is made real and positive.
pub(crate) fn normalize_and_fix_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pivot = v.iter().position(|c| c.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let phase = if v[pivot].norm() > 0.0 { v[pivot].conj() / v[pivot].norm() } else { Complex64::new(1.0, 0.0) };
    let scale = phase / norm;
    v.iter_mut().for_each(|c| *c *= scale);
}

fn leading_harmonics(amplitudes: &[Complex64], nx: usize, ny: usize, count: usize) -> Vec<Harmonic> {
    match decompose(amplitudes, nx, ny) {
        Ok(d) => d.ranked().into_iter().take(count).map(|((mx, my), weight)| Harmonic { mx, my, weight }).collect(),
        Err(_) => Vec::new(),
    }
}

/// Group (sorted) states into degenerate multiplets and label each one.
fn label_irreps(states: &mut [CollectiveState], sym: &SiteSymmetry, opts: &SpectrumOptions) {
    for st in states.iter_mut() {
        st.irrep = sym.classify(&[&st.amplitudes], opts.character_tol);
    }
}

/// Label one state by the isotypic component it lies in.
pub fn classify_state_irrep(state: &CollectiveState, array: &AtomArray) -> Result<Irrep, SpectrumError> {
    classify_amplitudes(&state.amplitudes, array, SpectrumOptions::default().character_tol)
}

pub fn classify_amplitudes(amplitudes: &[Complex64], array: &AtomArray, tol: f64) -> Result<Irrep, SpectrumError> {
    let sym = SiteSymmetry::for_array(array).ok_or(SpectrumError::NoPointGroup)?;
    match sym.classify(&[amplitudes], tol) {
        Irrep::Unresolved => Err(SpectrumError::UnresolvedIrrep {
            group: sym.group,
            characters: sym.characters(&[amplitudes]).iter().map(|c| c.re).collect(),
        }),
        irrep => Ok(irrep),
    }
}

/// Decomposition of a state from a grid array.
pub fn decompose_state(state: &CollectiveState, array: &AtomArray) -> Result<basis::BlochDecomposition, SpectrumError> {
    let (nx, ny) = array.grid_shape()?;
    Ok(decompose(&state.amplitudes, nx, ny)?)
}

/// Bilinear (unconjugated) product `a^T b`.
pub fn bilinear(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian product `a^dagger b`.
pub fn hermitian(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_array, LatticeDescriptor, LatticeKind, PolarizationTag};
    use crate::green::green_projected;
    use crate::hamiltonian::build_hamiltonian;

    #[test]
    fn single_atom_state() {
        let arr = AtomArray::from_positions(vec![[0.0, 0.0]], PolarizationTag::SigmaZ).unwrap();
        let states = diagonalize(&build_hamiltonian(&arr)).unwrap();
        assert_eq!(states.len(), 1);
        assert!(states[0].detuning.abs() < 1e-15);
        assert!((states[0].decay - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimer_closed_form() {
        let arr = AtomArray::from_positions(vec![[0.0, 0.0], [0.1, 0.0]], PolarizationTag::SigmaZ).unwrap();
        let states = diagonalize(&build_hamiltonian(&arr)).unwrap();
        let g = green_projected(0.1, 0.0, PolarizationTag::SigmaZ).unwrap();
        let lo = 1.0 - 3.0 * g.im;
        let hi = 1.0 + 3.0 * g.im;
        assert!((states[0].decay - lo).abs() < 1e-12);
        assert!((states[1].decay - hi).abs() < 1e-12);
        // mpmath reference of the closed form
        assert!((lo - 0.077_303_151_617_724_15).abs() < 1e-12);
        assert!((hi - 1.922_696_848_382_276).abs() < 1e-12);
    }

    #[test]
    fn sum_rule_and_residuals() {
        let arr = generate_array(LatticeDescriptor::square(6, 0.3), PolarizationTag::SigmaZ).unwrap();
        let states = diagonalize(&build_hamiltonian(&arr)).unwrap();
        let total: f64 = states.iter().map(|s| s.decay).sum();
        assert!((total - 36.0).abs() < 36.0 * 1e-10);
        for w in states.windows(2) {
            assert!(w[0].decay <= w[1].decay);
        }
        for s in &states {
            assert!(s.decay > 0.0);
            let norm: f64 = s.amplitudes.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn doublets_are_labelled_e_and_singlets_resolve() {
        let arr = generate_array(LatticeDescriptor::square(6, 0.35), PolarizationTag::SigmaZ).unwrap();
        let states = diagonalize(&build_hamiltonian(&arr)).unwrap();
        let count = |irrep| states.iter().filter(|s| s.irrep == irrep).count();
        // For N = 6: E carries the 18 odd-sum harmonics; A1, A2, B1, B2 split the remaining 18.
        assert_eq!(count(Irrep::E), 18);
        assert_eq!(count(Irrep::Unresolved), 0);
        assert_eq!(count(Irrep::A1) + count(Irrep::A2) + count(Irrep::B1) + count(Irrep::B2), 18);
        // odd-odd harmonics: 9 -> 6 symmetric (A1) + 3 antisymmetric (B1); even-even likewise B2/A2
        assert_eq!(count(Irrep::A1), 6);
        assert_eq!(count(Irrep::B1), 3);
        assert_eq!(count(Irrep::B2), 6);
        assert_eq!(count(Irrep::A2), 3);
    }

    #[test]
    fn single_state_classification() {
        let n = 5;
        let arr = generate_array(LatticeDescriptor::square(n, 0.3), PolarizationTag::SigmaZ).unwrap();
        let v: Vec<Complex64> = basis::standing_wave_basis(n, 1, 1).unwrap().into_iter().map(Complex64::from).collect();
        let st = CollectiveState { index: 0, detuning: 0.0, decay: 1.0, amplitudes: v, irrep: Irrep::Unresolved, dominant_harmonics: vec![] };
        assert_eq!(classify_state_irrep(&st, &arr), Ok(Irrep::A1));
        let e: Vec<Complex64> = basis::standing_wave_basis(n, 1, 2).unwrap().into_iter().map(Complex64::from).collect();
        let st = CollectiveState { amplitudes: e.clone(), ..st };
        assert_eq!(classify_state_irrep(&st, &arr), Ok(Irrep::E));
        let f: Vec<Complex64> = basis::standing_wave_basis(n, 2, 2).unwrap().into_iter().map(Complex64::from).collect();
        let mixed = e.iter().zip(&f).map(|(a, b)| a + b).collect();
        let st = CollectiveState { amplitudes: mixed, ..st };
        assert!(matches!(classify_state_irrep(&st, &arr), Err(SpectrumError::UnresolvedIrrep { .. })));
    }

    #[test]
    fn circular_polarizations_share_a_spectrum() {
        let d = LatticeDescriptor::new(LatticeKind::Hexagon, 3, 0.28);
        let p = diagonalize(&build_hamiltonian(&generate_array(d, PolarizationTag::SigmaPlus).unwrap())).unwrap();
        let m = diagonalize(&build_hamiltonian(&generate_array(d, PolarizationTag::SigmaMinus).unwrap())).unwrap();
        for (a, b) in p.iter().zip(&m) {
            assert!((a.eigenvalue() - b.eigenvalue()).norm() < 1e-12);
        }
    }
}
