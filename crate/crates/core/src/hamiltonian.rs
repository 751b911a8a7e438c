//! Non-Hermitian effective Hamiltonian in the single-excitation sector.
//!
//! The stored matrix is `(H / hbar - omega_0) / Gamma_0`: diagonal entries are
//! `-i/2`, off-diagonal entries `-(3 pi / k_0) e_d^* . G(R_ij) . e_d`.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::AtomArray;
use crate::green::projected_scalar;
use crate::units::COUPLING;

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    matrix: Mat<Complex64>,
    array: AtomArray,
}

impl EffectiveHamiltonian {
    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn array(&self) -> &AtomArray {
        &self.array
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Write the matrix as CSV rows `i, j, re, im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,re,im")?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.matrix[(i, j)];
                writeln!(w, "{i},{j},{:e},{:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Assemble the dense effective Hamiltonian of `array`.
pub fn build_hamiltonian(array: &AtomArray) -> EffectiveHamiltonian {
    let pos = array.positions();
    let n = pos.len();
    let pol = array.polarization;
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Complex64::new(0.0, -0.5)
                    } else {
                        let r = (pos[i][0] - pos[j][0]).hypot(pos[i][1] - pos[j][1]);
                        -COUPLING * projected_scalar(r, pol)
                    }
                })
                .collect()
        })
        .collect();
    let matrix = Mat::from_fn(n, n, |i, j| rows[i][j]);
    EffectiveHamiltonian { matrix, array: array.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_array, LatticeDescriptor, LatticeKind, PolarizationTag};
    use crate::green::green_projected;

    #[test]
    fn single_atom() {
        let arr = AtomArray::from_positions(vec![[0.0, 0.0]], PolarizationTag::SigmaZ).unwrap();
        let h = build_hamiltonian(&arr);
        assert_eq!(h.dim(), 1);
        assert_eq!(h.get(0, 0), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn dimer_entries() {
        let arr = AtomArray::from_positions(vec![[0.0, 0.0], [0.1, 0.0]], PolarizationTag::SigmaZ).unwrap();
        let h = build_hamiltonian(&arr);
        let g = green_projected(0.1, 0.0, PolarizationTag::SigmaZ).unwrap();
        let expect = -1.5 * g;
        assert!((h.get(0, 1) - expect).norm() < 1e-15);
        assert_eq!(h.get(0, 1), h.get(1, 0));
    }

    #[test]
    fn structural_invariants() {
        for (kind, pol) in [
            (LatticeKind::Square, PolarizationTag::SigmaZ),
            (LatticeKind::Hexagon, PolarizationTag::SigmaPlus),
            (LatticeKind::Triangle, PolarizationTag::SigmaMinus),
        ] {
            let arr = generate_array(LatticeDescriptor::new(kind, 4, 0.27), pol).unwrap();
            let h = build_hamiltonian(&arr);
            let n = h.dim();
            let mut trace_im = 0.0;
            for i in 0..n {
                assert_eq!(h.get(i, i), Complex64::new(0.0, -0.5));
                trace_im += h.get(i, i).im;
                for j in 0..n {
                    assert_eq!(h.get(i, j), h.get(j, i));
                }
            }
            assert_eq!(trace_im, -(n as f64) / 2.0);
        }
    }
}
