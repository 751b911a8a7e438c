//! Point-group symmetry of finite arrays and character-based irrep labels.
//!
//! Each group element acts on an array as an exact permutation of its sites
//! about the centroid. A state (or a degenerate set of states) is labelled by
//! comparing its characters `sum_k <psi_k, P_g psi_k>` with the character table.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Irrep;
use crate::geometry::{AtomArray, LatticeKind};

/// Point groups realised by the supported geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointGroup {
    C2v,
    C3v,
    C4v,
    C6v,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Rotation(f64),
    /// Mirror across the line through the centroid at this angle.
    Mirror(f64),
}

impl Op {
    fn apply(self, v: [f64; 2]) -> [f64; 2] {
        let (c, s) = match self {
            Op::Rotation(t) => (t.cos(), t.sin()),
            Op::Mirror(t) => ((2.0 * t).cos(), (2.0 * t).sin()),
        };
        match self {
            Op::Rotation(_) => [c * v[0] - s * v[1], s * v[0] + c * v[1]],
            Op::Mirror(_) => [c * v[0] + s * v[1], s * v[0] - c * v[1]],
        }
    }
}

struct Table {
    /// (operation, class index)
    ops: Vec<(Op, usize)>,
    /// (irrep label, dimension, character per class)
    rows: Vec<(Irrep, usize, Vec<f64>)>,
}

const DEG: f64 = PI / 180.0;

impl PointGroup {
    /// Elements and character table. `orientation` is the angle of the mirror
    /// lines that run parallel to a pair of array edges (the sigma_v class).
    fn table(self, orientation: f64) -> Table {
        let o = orientation;
        match self {
            PointGroup::C2v => Table {
                // classes: E, C2, sigma(xz) [line along x], sigma(yz) [line along y]
                ops: vec![(Op::Rotation(0.0), 0), (Op::Rotation(PI), 1), (Op::Mirror(o), 2), (Op::Mirror(o + 90.0 * DEG), 3)],
                rows: vec![
                    (Irrep::A1, 1, vec![1.0, 1.0, 1.0, 1.0]),
                    (Irrep::A2, 1, vec![1.0, 1.0, -1.0, -1.0]),
                    (Irrep::B1, 1, vec![1.0, -1.0, 1.0, -1.0]),
                    (Irrep::B2, 1, vec![1.0, -1.0, -1.0, 1.0]),
                ],
            },
            PointGroup::C4v => Table {
                // classes: E, 2C4, C2, 2sigma_v, 2sigma_d
                ops: vec![
                    (Op::Rotation(0.0), 0),
                    (Op::Rotation(90.0 * DEG), 1),
                    (Op::Rotation(270.0 * DEG), 1),
                    (Op::Rotation(PI), 2),
                    (Op::Mirror(o), 3),
                    (Op::Mirror(o + 90.0 * DEG), 3),
                    (Op::Mirror(o + 45.0 * DEG), 4),
                    (Op::Mirror(o + 135.0 * DEG), 4),
                ],
                rows: vec![
                    (Irrep::A1, 1, vec![1.0, 1.0, 1.0, 1.0, 1.0]),
                    (Irrep::A2, 1, vec![1.0, 1.0, 1.0, -1.0, -1.0]),
                    (Irrep::B1, 1, vec![1.0, -1.0, 1.0, 1.0, -1.0]),
                    (Irrep::B2, 1, vec![1.0, -1.0, 1.0, -1.0, 1.0]),
                    (Irrep::E, 2, vec![2.0, 0.0, -2.0, 0.0, 0.0]),
                ],
            },
            PointGroup::C3v => Table {
                // classes: E, 2C3, 3sigma_v
                ops: vec![
                    (Op::Rotation(0.0), 0),
                    (Op::Rotation(120.0 * DEG), 1),
                    (Op::Rotation(240.0 * DEG), 1),
                    (Op::Mirror(o), 2),
                    (Op::Mirror(o + 60.0 * DEG), 2),
                    (Op::Mirror(o + 120.0 * DEG), 2),
                ],
                rows: vec![
                    (Irrep::A1, 1, vec![1.0, 1.0, 1.0]),
                    (Irrep::A2, 1, vec![1.0, 1.0, -1.0]),
                    (Irrep::E, 2, vec![2.0, -1.0, 0.0]),
                ],
            },
            PointGroup::C6v => Table {
                // classes: E, 2C6, 2C3, C2, 3sigma_v (through corners), 3sigma_d
                ops: vec![
                    (Op::Rotation(0.0), 0),
                    (Op::Rotation(60.0 * DEG), 1),
                    (Op::Rotation(300.0 * DEG), 1),
                    (Op::Rotation(120.0 * DEG), 2),
                    (Op::Rotation(240.0 * DEG), 2),
                    (Op::Rotation(PI), 3),
                    (Op::Mirror(o), 4),
                    (Op::Mirror(o + 60.0 * DEG), 4),
                    (Op::Mirror(o + 120.0 * DEG), 4),
                    (Op::Mirror(o + 30.0 * DEG), 5),
                    (Op::Mirror(o + 90.0 * DEG), 5),
                    (Op::Mirror(o + 150.0 * DEG), 5),
                ],
                rows: vec![
                    (Irrep::A1, 1, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
                    (Irrep::A2, 1, vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0]),
                    (Irrep::B1, 1, vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0]),
                    (Irrep::B2, 1, vec![1.0, -1.0, 1.0, -1.0, -1.0, 1.0]),
                    // E1 and E2 share the label E
                    (Irrep::E, 2, vec![2.0, 1.0, -1.0, -2.0, 0.0, 0.0]),
                    (Irrep::E, 2, vec![2.0, -1.0, -1.0, 2.0, 0.0, 0.0]),
                ],
            },
        }
    }
}

/// Site permutations of an array under its point group.
#[derive(Debug, Clone)]
pub struct SiteSymmetry {
    pub group: PointGroup,
    /// `perms[g][i]` is the site that element `g` maps site `i` onto.
    perms: Vec<Vec<usize>>,
    op_class: Vec<usize>,
    rows: Vec<(Irrep, usize, Vec<f64>)>,
}

impl SiteSymmetry {
    /// Point group of a generated array, or `None` for hand-placed clusters or
    /// when an element fails to map the sites onto themselves.
    pub fn for_array(array: &AtomArray) -> Option<Self> {
        let d = array.descriptor?;
        let (group, orientation) = match d.kind {
            LatticeKind::Square => (PointGroup::C4v, 0.0),
            LatticeKind::Rectangular => {
                if d.side_count == d.side_count_y && (d.period_x - d.period_y).abs() < 1e-12 {
                    (PointGroup::C4v, 0.0)
                } else {
                    (PointGroup::C2v, 0.0)
                }
            }
            // diamond: mirror lines parallel to the edges are the lattice diagonals
            LatticeKind::DiagonalSquare => (PointGroup::C4v, 45.0 * DEG),
            // triangle: mirror lines through each corner, one of them vertical
            LatticeKind::Triangle => (PointGroup::C3v, 30.0 * DEG),
            // hexagon: corners on the x axis
            LatticeKind::Hexagon => (PointGroup::C6v, 0.0),
        };
        Self::with_group(array, group, orientation)
    }

    fn with_group(array: &AtomArray, group: PointGroup, orientation: f64) -> Option<Self> {
        let table = group.table(orientation);
        let c = array.centroid();
        let pos = array.positions();
        let tol = 1e-7 * (1.0 + array.min_distance().min(1.0));
        let mut perms = Vec::with_capacity(table.ops.len());
        for &(op, _) in &table.ops {
            let mut perm = Vec::with_capacity(pos.len());
            for p in pos {
                let v = op.apply([p[0] - c[0], p[1] - c[1]]);
                let target = [c[0] + v[0], c[1] + v[1]];
                let j = pos
                    .iter()
                    .position(|q| (q[0] - target[0]).abs() < tol && (q[1] - target[1]).abs() < tol)?;
                perm.push(j);
            }
            perms.push(perm);
        }
        Some(Self { group, perms, op_class: table.ops.iter().map(|x| x.1).collect(), rows: table.rows })
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    /// `(P_g v)_i = v_{perm_g(i)}`.
    pub fn apply(&self, element: usize, v: &[Complex64]) -> Vec<Complex64> {
        self.perms[element].iter().map(|&j| v[j]).collect()
    }

    /// Characters of the subspace spanned by `vectors`, one per group element.
    pub fn characters(&self, vectors: &[&[Complex64]]) -> Vec<Complex64> {
        let basis = orthonormalize(vectors);
        self.perms
            .iter()
            .map(|perm| {
                basis
                    .iter()
                    .map(|q| q.iter().zip(perm).map(|(a, &j)| a.conj() * q[j]).sum::<Complex64>())
                    .sum()
            })
            .collect()
    }

    /// Irrep whose isotypic projector keeps at least `1 - tol` of the norm of
    /// every vector, or `Unresolved` if none does or the vectors disagree.
    ///
    /// Unlike a character match this needs neither a complete nor a
    /// well-conditioned basis of a multiplet.
    pub fn classify(&self, vectors: &[&[Complex64]], tol: f64) -> Irrep {
        let mut label = None;
        for v in vectors {
            let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            if !(norm2 > 0.0) {
                return Irrep::Unresolved;
            }
            let found = self.rows.iter().find(|(_, _, row)| self.isotypic_weight(v, row) >= (1.0 - tol) * norm2);
            match (found, label) {
                (None, _) => return Irrep::Unresolved,
                (Some(r), Some(l)) if r.0 != l => return Irrep::Unresolved,
                (Some(r), _) => label = Some(r.0),
            }
        }
        label.unwrap_or(Irrep::Unresolved)
    }

    /// `|P v|^2` with `P = (d / |G|) sum_g chi(g) R_g`.
    fn isotypic_weight(&self, v: &[Complex64], row: &[f64]) -> f64 {
        let mut p = vec![Complex64::new(0.0, 0.0); v.len()];
        for (perm, &cls) in self.perms.iter().zip(&self.op_class) {
            let chi = row[cls];
            if chi != 0.0 {
                p.iter_mut().zip(perm).for_each(|(pi, &j)| *pi += chi * v[j]);
            }
        }
        let scale = row[0] / self.perms.len() as f64;
        p.iter().map(|c| c.norm_sqr()).sum::<f64>() * scale * scale
    }
}

/// Hermitian Gram-Schmidt.
fn orthonormalize(vectors: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w: Vec<Complex64> = v.to_vec();
        for q in &out {
            let proj: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= proj * qi;
            }
        }
        let n = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            w.iter_mut().for_each(|c| *c /= n);
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_array, LatticeDescriptor, PolarizationTag};
    use crate::spectrum::basis::{standing_wave_basis, symmetrize, Parity};

    fn arr(kind: LatticeKind, n: usize) -> AtomArray {
        generate_array(LatticeDescriptor::new(kind, n, 0.3), PolarizationTag::SigmaZ).unwrap()
    }

    fn cplx(v: Vec<f64>) -> Vec<Complex64> {
        v.into_iter().map(Complex64::from).collect()
    }

    #[test]
    fn groups_for_each_geometry() {
        assert_eq!(SiteSymmetry::for_array(&arr(LatticeKind::Square, 4)).unwrap().group, PointGroup::C4v);
        assert_eq!(SiteSymmetry::for_array(&arr(LatticeKind::DiagonalSquare, 4)).unwrap().group, PointGroup::C4v);
        assert_eq!(SiteSymmetry::for_array(&arr(LatticeKind::Triangle, 5)).unwrap().order(), 6);
        assert_eq!(SiteSymmetry::for_array(&arr(LatticeKind::Hexagon, 3)).unwrap().order(), 12);
        let rect = generate_array(LatticeDescriptor::rectangular(4, 4, 0.3, 0.32), PolarizationTag::SigmaZ).unwrap();
        assert_eq!(SiteSymmetry::for_array(&rect).unwrap().group, PointGroup::C2v);
    }

    #[test]
    fn basis_functions_get_their_table_labels() {
        let n = 8;
        let sym = SiteSymmetry::for_array(&arr(LatticeKind::Square, n)).unwrap();
        let one = |v: Vec<f64>| {
            let c = cplx(v);
            sym.classify(&[&c], 1e-8)
        };
        assert_eq!(one(standing_wave_basis(n, 1, 1).unwrap()), Irrep::A1);
        assert_eq!(one(standing_wave_basis(n, 8, 8).unwrap()), Irrep::B2);
        assert_eq!(one(symmetrize(n, 6, 8, Parity::Antisymmetric).unwrap()), Irrep::A2);
        assert_eq!(one(symmetrize(n, 6, 8, Parity::Symmetric).unwrap()), Irrep::B2);
        assert_eq!(one(symmetrize(n, 1, 3, Parity::Antisymmetric).unwrap()), Irrep::B1);
        let a = cplx(standing_wave_basis(n, 1, 2).unwrap());
        let b = cplx(standing_wave_basis(n, 2, 1).unwrap());
        assert_eq!(sym.classify(&[&a, &b], 1e-8), Irrep::E);
        // a lone member of a doublet still lies in the E component
        assert_eq!(sym.classify(&[&a], 1e-8), Irrep::E);
        let mixed: Vec<Complex64> = cplx(standing_wave_basis(n, 1, 1).unwrap())
            .iter()
            .zip(cplx(symmetrize(n, 6, 8, Parity::Antisymmetric).unwrap()))
            .map(|(x, y)| x + y)
            .collect();
        assert_eq!(sym.classify(&[&mixed], 1e-4), Irrep::Unresolved);
    }

    #[test]
    fn uniform_state_is_fully_symmetric_everywhere() {
        for kind in [LatticeKind::DiagonalSquare, LatticeKind::Triangle, LatticeKind::Hexagon] {
            let a = arr(kind, 4);
            let sym = SiteSymmetry::for_array(&a).unwrap();
            let v = vec![Complex64::new(1.0 / (a.len() as f64).sqrt(), 0.0); a.len()];
            assert_eq!(sym.classify(&[&v], 1e-8), Irrep::A1, "{kind:?}");
        }
    }

    #[test]
    fn hand_placed_clusters_have_no_group() {
        let a = AtomArray::from_positions(vec![[0.0, 0.0], [0.2, 0.0]], PolarizationTag::SigmaZ).unwrap();
        assert!(SiteSymmetry::for_array(&a).is_none());
    }
}
