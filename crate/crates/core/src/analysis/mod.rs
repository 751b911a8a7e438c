//! Campaigns over spectra: tracked period sweeps, period optimization,
//! size scaling, lattice deformation and corner-amplitude asymptotics.

mod sweeps;
mod tracking;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::spectrum::{CollectiveState, Irrep, SpectrumError};

pub use sweeps::*;
pub use tracking::{overlap, track, TrackedBranch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("branch '{label}' lost at parameter {parameter}: best overlap {overlap:.3}")]
    TrackingLost { label: String, parameter: f64, overlap: f64 },
    #[error("no interior minimum: smallest decay {decay:.4e} sits at the range boundary {parameter}")]
    NoInteriorMinimum { parameter: f64, decay: f64 },
    #[error("no state matches selector {selector} at parameter {parameter}")]
    BranchNotFound { selector: String, parameter: f64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Picks the most subradiant state satisfying all given filters.
///
/// An empty filter list accepts everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BranchSelector {
    pub irreps: Vec<Irrep>,
    /// Accepted leading harmonics `(mx, my)`.
    pub harmonics: Vec<(usize, usize)>,
}

impl BranchSelector {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn irreps(irreps: &[Irrep]) -> Self {
        Self { irreps: irreps.to_vec(), harmonics: Vec::new() }
    }

    /// The `psi^{(N,N)}` checkerboard of an `N x N` grid.
    pub fn checkerboard(n: usize) -> Self {
        Self { irreps: Vec::new(), harmonics: vec![(n, n)] }
    }

    /// The A2 combination `psi^{(N,N-2)-}`.
    pub fn edge_antisymmetric(n: usize) -> Self {
        Self { irreps: vec![Irrep::A2], harmonics: vec![(n, n - 2), (n - 2, n)] }
    }

    pub fn matches(&self, state: &CollectiveState) -> bool {
        (self.irreps.is_empty() || self.irreps.contains(&state.irrep))
            && (self.harmonics.is_empty() || state.dominant().is_some_and(|h| self.harmonics.contains(&h)))
    }

    /// Index of the smallest-decay match.
    pub fn select(&self, states: &[CollectiveState]) -> Option<usize> {
        states
            .iter()
            .enumerate()
            .filter(|(_, s)| self.matches(s))
            .min_by(|a, b| a.1.decay.total_cmp(&b.1.decay))
            .map(|(i, _)| i)
    }
}

impl std::fmt::Display for BranchSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.irreps.is_empty() && self.harmonics.is_empty() {
            return write!(f, "any");
        }
        let irreps: Vec<String> = self.irreps.iter().map(|i| i.to_string()).collect();
        let harm: Vec<String> = self.harmonics.iter().map(|(x, y)| format!("({x},{y})")).collect();
        write!(f, "{}", [irreps.join("/"), harm.join("/")].iter().filter(|s| !s.is_empty()).cloned().collect::<Vec<_>>().join(" "))
    }
}

/// Short label for a state: irrep and leading harmonic.
pub fn state_label(state: &CollectiveState) -> String {
    match state.dominant() {
        Some((mx, my)) => format!("{} ({mx},{my})", state.irrep),
        None => state.irrep.to_string(),
    }
}

/// `y = prefactor * x^exponent` fitted by least squares in log-log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS deviation of the fit in decades.
    pub residual: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl PowerLawFit {
    /// Residual below 0.2 decades.
    pub fn is_reliable(&self) -> bool {
        self.residual < 0.2
    }
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit, AnalysisError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(AnalysisError::InvalidRequest(format!("power-law fit needs at least two paired points, got {} and {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(AnalysisError::InvalidRequest("power-law fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::InvalidRequest("power-law fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - exponent * a).powi(2)).sum();
    Ok(PowerLawFit {
        exponent,
        prefactor: intercept.exp(),
        residual: (ss / n).sqrt() / std::f64::consts::LN_10,
        x_min: x.iter().cloned().fold(f64::INFINITY, f64::min),
        x_max: x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        points: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_recovered() {
        let x = [2.0, 3.0, 5.0, 8.0, 13.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 0.7 * v.powf(-2.5)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.exponent + 2.5).abs() < 1e-12);
        assert!((f.prefactor - 0.7).abs() < 1e-12);
        assert!(f.residual < 1e-12 && f.is_reliable());
        assert_eq!((f.x_min, f.x_max, f.points), (2.0, 13.0, 5));
    }

    #[test]
    fn residual_in_decades() {
        // factor-of-10 scatter about a flat line is one decade RMS
        let f = fit_power_law(&[1.0, 1.0, 4.0, 4.0], &[10.0, 0.1, 10.0, 0.1]).unwrap();
        assert!(f.exponent.abs() < 1e-12);
        assert!((f.residual - 1.0).abs() < 1e-12 && !f.is_reliable());
    }

    #[test]
    fn degenerate_input_rejected() {
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, -1.0]).is_err());
        assert!(fit_power_law(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn selector_filters() {
        let st = |irrep, h: (usize, usize), decay| CollectiveState {
            index: 0,
            detuning: 0.0,
            decay,
            amplitudes: vec![],
            irrep,
            dominant_harmonics: vec![crate::spectrum::Harmonic { mx: h.0, my: h.1, weight: 0.5 }],
        };
        let states = vec![st(Irrep::E, (5, 6), 1e-4), st(Irrep::A2, (6, 4), 1e-3), st(Irrep::B2, (6, 6), 1e-5), st(Irrep::A2, (4, 6), 5e-4)];
        assert_eq!(BranchSelector::any().select(&states), Some(2));
        assert_eq!(BranchSelector::edge_antisymmetric(6).select(&states), Some(3));
        assert_eq!(BranchSelector::checkerboard(6).select(&states), Some(2));
        assert_eq!(BranchSelector::irreps(&[Irrep::A1]).select(&states), None);
        assert_eq!(BranchSelector::edge_antisymmetric(6).to_string(), "A2 (6,4)/(4,6)");
    }
}
