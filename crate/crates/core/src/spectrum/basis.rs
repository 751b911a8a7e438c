//! Standing-wave basis of a finite grid and its symmetry-adapted combinations.
//!
//! `psi^{(mx,my)}(nx, ny) = sqrt(2/(Nx+1)) sin(q_x mx nx) * sqrt(2/(Ny+1)) sin(q_y my ny)`
//! with `q = pi / (N + 1)`; for a square grid the prefactor is `2 / (N + 1)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Irrep;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BasisError {
    #[error("harmonic index ({mx}, {my}) outside 1..={nx} x 1..={ny}")]
    IndexOutOfRange { mx: usize, my: usize, nx: usize, ny: usize },
    #[error("symmetrized pair ({0}, {1}) needs distinct indices with an even sum")]
    InvalidPair(usize, usize),
    #[error("amplitude vector has length {got}, grid needs {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// Discretization quasi-wavevector `pi / (N + 1)`.
pub fn discretization_wavevector(n: usize) -> f64 {
    PI / (n as f64 + 1.0)
}

/// One-dimensional sine mode `sqrt(2/(N+1)) sin(q m n)` for `n = 1..=N`.
fn sine_mode(n_sites: usize, m: usize) -> Vec<f64> {
    let q = discretization_wavevector(n_sites);
    let norm = (2.0 / (n_sites as f64 + 1.0)).sqrt();
    (1..=n_sites).map(|n| norm * (q * (m * n) as f64).sin()).collect()
}

/// `psi^{(mx,my)}` on an `nx x ny` grid, row-major in `(n_y, n_x)`.
pub fn standing_wave_basis_rect(nx: usize, ny: usize, mx: usize, my: usize) -> Result<Vec<f64>, BasisError> {
    if mx == 0 || my == 0 || mx > nx || my > ny {
        return Err(BasisError::IndexOutOfRange { mx, my, nx, ny });
    }
    let sx = sine_mode(nx, mx);
    let sy = sine_mode(ny, my);
    Ok(sy.iter().flat_map(|&y| sx.iter().map(move |&x| x * y)).collect())
}

/// `psi^{(mx,my)}` on an `N x N` grid.
pub fn standing_wave_basis(n: usize, mx: usize, my: usize) -> Result<Vec<f64>, BasisError> {
    standing_wave_basis_rect(n, n, mx, my)
}

/// Sign of a symmetrized combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Self::Symmetric => 1.0,
            Self::Antisymmetric => -1.0,
        }
    }
}

/// `(psi^{(m1,m2)} +- psi^{(m2,m1)}) / sqrt 2` on an `N x N` grid.
pub fn symmetrize(n: usize, m1: usize, m2: usize, parity: Parity) -> Result<Vec<f64>, BasisError> {
    if m1 == m2 || !(m1 + m2).is_multiple_of(2) {
        return Err(BasisError::InvalidPair(m1, m2));
    }
    let a = standing_wave_basis(n, m1, m2)?;
    let b = standing_wave_basis(n, m2, m1)?;
    let s = parity.sign();
    Ok(a.iter().zip(&b).map(|(x, y)| FRAC_1_SQRT_2 * (x + s * y)).collect())
}

/// Symmetry content of a single basis function `psi^{(mx,my)}` under C4v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisSymmetry {
    /// The function itself belongs to one irrep.
    Definite(Irrep),
    /// Only the combinations with `psi^{(my,mx)}` are symmetry-adapted.
    Split { symmetric: Irrep, antisymmetric: Irrep },
}

/// Irrep classification of `psi^{(mx,my)}` on a square grid.
///
/// A mirror across a grid axis multiplies `sin(q m n)` by `(-1)^(m+1)`, and the
/// diagonal mirror swaps `mx` and `my`; the table follows from those two facts.
pub fn classify_basis_irrep(mx: usize, my: usize) -> BasisSymmetry {
    if (mx + my) % 2 == 1 {
        return BasisSymmetry::Definite(Irrep::E);
    }
    let odd = mx % 2 == 1;
    if mx == my {
        return BasisSymmetry::Definite(if odd { Irrep::A1 } else { Irrep::B2 });
    }
    if odd {
        BasisSymmetry::Split { symmetric: Irrep::A1, antisymmetric: Irrep::B1 }
    } else {
        BasisSymmetry::Split { symmetric: Irrep::B2, antisymmetric: Irrep::A2 }
    }
}

/// Irrep of the symmetrized combination `psi^{(m1,m2) +-}`.
pub fn symmetrized_irrep(m1: usize, m2: usize, parity: Parity) -> Result<Irrep, BasisError> {
    if m1 == m2 || !(m1 + m2).is_multiple_of(2) {
        return Err(BasisError::InvalidPair(m1, m2));
    }
    Ok(match (classify_basis_irrep(m1, m2), parity) {
        (BasisSymmetry::Split { symmetric, .. }, Parity::Symmetric) => symmetric,
        (BasisSymmetry::Split { antisymmetric, .. }, Parity::Antisymmetric) => antisymmetric,
        (BasisSymmetry::Definite(irrep), _) => irrep,
    })
}

/// Expansion coefficients `c_{mx,my}` of a grid state in the standing-wave basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochDecomposition {
    pub nx: usize,
    pub ny: usize,
    /// `q_0 = pi / (N_x + 1)`.
    pub q0: f64,
    /// Row-major in `(m_y, m_x)`, 1-based indices stored at `(my - 1) * nx + (mx - 1)`.
    pub coefficients: Vec<Complex64>,
}

impl BlochDecomposition {
    pub fn coefficient(&self, mx: usize, my: usize) -> Complex64 {
        self.coefficients[(my - 1) * self.nx + (mx - 1)]
    }

    pub fn weight(&self, mx: usize, my: usize) -> f64 {
        self.coefficient(mx, my).norm_sqr()
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Harmonics sorted by decreasing weight `|c|^2`, ties by `(my, mx)`.
    pub fn ranked(&self) -> Vec<((usize, usize), f64)> {
        let mut v: Vec<_> = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| ((k % self.nx + 1, k / self.nx + 1), c.norm_sqr()))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0 .1.cmp(&b.0 .1)).then(a.0 .0.cmp(&b.0 .0)));
        v
    }

    /// Rebuild grid amplitudes from the coefficients.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        separable_transform(&self.coefficients, self.nx, self.ny)
    }
}

/// Apply the (symmetric, orthogonal) sine transform along both axes.
fn separable_transform(values: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let sx: Vec<Vec<f64>> = (1..=nx).map(|m| sine_mode(nx, m)).collect();
    let sy: Vec<Vec<f64>> = (1..=ny).map(|m| sine_mode(ny, m)).collect();
    // along x
    let mut tmp = vec![Complex64::new(0.0, 0.0); nx * ny];
    for iy in 0..ny {
        for (mx, mode) in sx.iter().enumerate() {
            tmp[iy * nx + mx] = (0..nx).map(|ix| mode[ix] * values[iy * nx + ix]).sum();
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
    for (my, mode) in sy.iter().enumerate() {
        for mx in 0..nx {
            out[my * nx + mx] = (0..ny).map(|iy| mode[iy] * tmp[iy * nx + mx]).sum();
        }
    }
    out
}

/// Project grid amplitudes on the standing-wave basis (real basis, no conjugation).
pub fn decompose(amplitudes: &[Complex64], nx: usize, ny: usize) -> Result<BlochDecomposition, BasisError> {
    if amplitudes.len() != nx * ny {
        return Err(BasisError::LengthMismatch { got: amplitudes.len(), expected: nx * ny });
    }
    Ok(BlochDecomposition {
        nx,
        ny,
        q0: discretization_wavevector(nx),
        coefficients: separable_transform(amplitudes, nx, ny),
    })
}

/// Closed form of the corner amplitude `psi^{(N,N)}_{1,1} = (2/(N+1)) sin^2(q0)`.
pub fn corner_amplitude_symmetric(n: usize) -> f64 {
    let q0 = discretization_wavevector(n);
    2.0 / PI * q0 * q0.sin().powi(2)
}

/// Closed form of the next-to-corner amplitude of `psi^{(N-2,N)-}` at site `(n_x, n_y) = (2, 1)`.
pub fn corner_amplitude_antisymmetric(n: usize) -> f64 {
    let q0 = discretization_wavevector(n);
    -(2f64.sqrt() / PI) * q0 * (q0.sin() * (6.0 * q0).sin() - (3.0 * q0).sin() * (2.0 * q0).sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn q0_for_twelve() {
        assert!((discretization_wavevector(12) - 0.241_660_973_353_061).abs() < 1e-12);
    }

    #[test]
    fn corner_value_n12() {
        let psi = standing_wave_basis(12, 12, 12).unwrap();
        let direct = (2.0 / 13.0) * (PI / 13.0).sin().powi(2);
        assert!((psi[0] - direct).abs() < 1e-15);
        assert!((psi[0] - 8.811e-3).abs() < 5e-7);
        assert!((corner_amplitude_symmetric(12) - psi[0]).abs() < 1e-15);
    }

    #[test]
    fn antisymmetric_next_to_corner_n12() {
        let n = 12;
        let v = symmetrize(n, n - 2, n, Parity::Antisymmetric).unwrap();
        // The closed form is the amplitude at (n_x, n_y) = (2, 1); the mirror site
        // (1, 2) carries the opposite sign.
        let got = v[1];
        assert!((got - corner_amplitude_antisymmetric(n)).abs() < 1e-15);
        assert!((got - 7.680e-3).abs() < 5e-7);
        assert!((v[n] + got).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_basis() {
        for n in [2usize, 5, 8] {
            let all: Vec<Vec<f64>> = (1..=n)
                .flat_map(|my| (1..=n).map(move |mx| (mx, my)))
                .map(|(mx, my)| standing_wave_basis(n, mx, my).unwrap())
                .collect();
            for (i, a) in all.iter().enumerate() {
                for (j, b) in all.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(a, b) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetrized_pairs() {
        let n = 8;
        let p = symmetrize(n, 2, 6, Parity::Symmetric).unwrap();
        let m = symmetrize(n, 2, 6, Parity::Antisymmetric).unwrap();
        assert!(dot(&p, &m).abs() < 1e-14);
        assert!((dot(&m, &m) - 1.0).abs() < 1e-14);
        for k in 0..n {
            assert!(m[k * n + k].abs() < 1e-15);
        }
        assert_eq!(symmetrize(n, 2, 3, Parity::Symmetric), Err(BasisError::InvalidPair(2, 3)));
        assert_eq!(symmetrize(n, 4, 4, Parity::Symmetric), Err(BasisError::InvalidPair(4, 4)));
        assert!(matches!(standing_wave_basis(4, 5, 1), Err(BasisError::IndexOutOfRange { .. })));
    }

    #[test]
    fn basis_irreps() {
        assert_eq!(classify_basis_irrep(12, 12), BasisSymmetry::Definite(Irrep::B2));
        assert_eq!(classify_basis_irrep(3, 3), BasisSymmetry::Definite(Irrep::A1));
        assert_eq!(classify_basis_irrep(1, 2), BasisSymmetry::Definite(Irrep::E));
        assert_eq!(symmetrized_irrep(10, 12, Parity::Antisymmetric), Ok(Irrep::A2));
        assert_eq!(symmetrized_irrep(1, 3, Parity::Antisymmetric), Ok(Irrep::B1));
        assert_eq!(symmetrized_irrep(1, 3, Parity::Symmetric), Ok(Irrep::A1));
    }

    #[test]
    fn decomposition_of_basis_vector() {
        let n = 7;
        let v: Vec<Complex64> = standing_wave_basis(n, 3, 5).unwrap().into_iter().map(Complex64::from).collect();
        let d = decompose(&v, n, n).unwrap();
        for my in 1..=n {
            for mx in 1..=n {
                let expect = if (mx, my) == (3, 5) { 1.0 } else { 0.0 };
                assert!((d.coefficient(mx, my) - expect).norm() < 1e-13);
            }
        }
        assert_eq!(d.ranked()[0].0, (3, 5));
    }

    proptest::proptest! {
        #[test]
        fn decomposition_preserves_norm_and_inverts(
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 30),
        ) {
            let (nx, ny) = (6, 5);
            let raw: Vec<Complex64> = seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            proptest::prop_assume!(norm > 1e-3);
            let v: Vec<Complex64> = raw.iter().map(|c| c / norm).collect();
            let d = decompose(&v, nx, ny).unwrap();
            proptest::prop_assert!((d.total_weight() - 1.0).abs() < 1e-10);
            let back = d.reconstruct();
            for (a, b) in back.iter().zip(&v) {
                proptest::prop_assert!((a - b).norm() < 1e-10);
            }
        }
    }
}
