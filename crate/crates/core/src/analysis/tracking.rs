//! Following one eigenstate through a sequence of spectra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state_label;
use crate::spectrum::CollectiveState;

/// `|a^T b| / (|a| |b|)`.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    dot.norm() / (na * nb)
}

/// One state followed across parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedBranch {
    /// Irrep and leading harmonic of the state where tracking started.
    pub label: String,
    pub parameters: Vec<f64>,
    pub states: Vec<CollectiveState>,
    /// `overlaps[i]` links point `i` to point `i + 1`.
    pub overlaps: Vec<f64>,
    /// Parameters reached through an overlap below threshold.
    pub splits: Vec<f64>,
}

impl TrackedBranch {
    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn decays(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.decay).collect()
    }

    /// Position of the smallest decay.
    pub fn argmin(&self) -> usize {
        (0..self.len()).min_by(|&a, &b| self.states[a].decay.total_cmp(&self.states[b].decay)).unwrap_or(0)
    }

    pub fn has_interior_minimum(&self) -> bool {
        let i = self.argmin();
        i > 0 && i + 1 < self.len()
    }

    /// Decay never changes direction along the parameter.
    pub fn is_monotonic(&self) -> bool {
        let d = self.decays();
        let up = d.windows(2).all(|w| w[1] >= w[0]);
        let down = d.windows(2).all(|w| w[1] <= w[0]);
        up || down
    }

    /// Reversed copy, so parameters can be presented in ascending order.
    pub fn reversed(mut self) -> Self {
        self.parameters.reverse();
        self.states.reverse();
        self.overlaps.reverse();
        self
    }

    pub fn is_intact(&self) -> bool {
        self.splits.is_empty()
    }
}

/// Follow `spectra[0][start]` through the sequence by maximal overlap.
///
/// Every step takes the best match; steps whose overlap falls below
/// `threshold` are recorded in `splits`.
pub fn track(parameters: &[f64], spectra: &[Vec<CollectiveState>], start: usize, threshold: f64) -> TrackedBranch {
    let first = spectra[0][start].clone();
    let mut branch = TrackedBranch {
        label: state_label(&first),
        parameters: vec![parameters[0]],
        states: vec![first],
        overlaps: Vec::new(),
        splits: Vec::new(),
    };
    for (p, spec) in parameters.iter().zip(spectra).skip(1) {
        let prev = &branch.states.last().expect("branch starts non-empty").amplitudes;
        let (best, ov) = best_match(prev, spec);
        if ov < threshold {
            branch.splits.push(*p);
        }
        branch.parameters.push(*p);
        branch.states.push(spec[best].clone());
        branch.overlaps.push(ov);
    }
    branch
}

/// Index and overlap of the state closest to `reference`.
pub(crate) fn best_match(reference: &[Complex64], states: &[CollectiveState]) -> (usize, f64) {
    states
        .iter()
        .enumerate()
        .map(|(i, s)| (i, overlap(reference, &s.amplitudes)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .expect("spectrum is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_array, LatticeDescriptor, PolarizationTag};
    use crate::hamiltonian::build_hamiltonian;
    use crate::spectrum::diagonalize;

    fn spectra(periods: &[f64]) -> Vec<Vec<CollectiveState>> {
        periods
            .iter()
            .map(|&a| diagonalize(&build_hamiltonian(&generate_array(LatticeDescriptor::square(6, a), PolarizationTag::SigmaZ).unwrap())).unwrap())
            .collect()
    }

    #[test]
    fn overlap_is_phase_blind() {
        let a = vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let b: Vec<Complex64> = a.iter().map(|c| c * Complex64::from_polar(2.0, 1.1)).collect();
        assert!((overlap(&a, &b) - 1.0).abs() < 1e-15);
        let c = vec![Complex64::new(0.8, 0.0), Complex64::new(-0.6, 0.0)];
        assert!(overlap(&a, &c) < 1e-15);
    }

    #[test]
    fn checkerboard_followed_and_reversible() {
        let periods: Vec<f64> = (0..8).map(|i| 0.30 + 0.004 * i as f64).collect();
        let specs = spectra(&periods);
        let start = specs[0].iter().position(|s| s.dominant() == Some((6, 6))).unwrap();
        let fwd = track(&periods, &specs, start, 0.5);
        assert!(fwd.is_intact());
        assert!(fwd.states.iter().all(|s| s.dominant() == Some((6, 6))));
        assert!(fwd.overlaps.iter().all(|&o| o > 0.9));

        let rp: Vec<f64> = periods.iter().rev().cloned().collect();
        let rs: Vec<Vec<CollectiveState>> = specs.iter().rev().cloned().collect();
        let end = fwd.states.last().unwrap().index;
        let back = track(&rp, &rs, end, 0.5).reversed();
        let ids = |b: &TrackedBranch| b.states.iter().map(|s| s.index).collect::<Vec<_>>();
        assert_eq!(ids(&fwd), ids(&back));
    }

    #[test]
    fn unrelated_spectrum_reports_split() {
        let specs = spectra(&[0.3, 0.3]);
        let mut other = specs[1].clone();
        // replace every state by the uniform vector, orthogonal to the checkerboard
        let n = other[0].amplitudes.len();
        for s in other.iter_mut() {
            s.amplitudes = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        }
        let start = specs[0].iter().position(|s| s.dominant() == Some((6, 6))).unwrap();
        let b = track(&[0.3, 0.31], &[specs[0].clone(), other], start, 0.5);
        assert_eq!(b.splits, vec![0.31]);
    }
}
