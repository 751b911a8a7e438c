//! Sweeps over period, size and aspect ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tracking::{best_match, overlap, track, TrackedBranch};
use super::{fit_power_law, state_label, AnalysisError, BranchSelector, PowerLawFit};
use crate::geometry::{generate_array, LatticeDescriptor, LatticeKind, PolarizationTag};
use crate::hamiltonian::build_hamiltonian;
use crate::spectrum::basis::{corner_amplitude_antisymmetric, corner_amplitude_symmetric, discretization_wavevector};
use crate::spectrum::{diagonalize, CollectiveState, Irrep};

/// Largest side count accepted without an explicit override.
pub const MAX_SIDE: usize = 30;

fn spectrum_for(desc: LatticeDescriptor, pol: PolarizationTag) -> Result<Vec<CollectiveState>, AnalysisError> {
    Ok(diagonalize(&build_hamiltonian(&generate_array(desc, pol)?))?)
}

fn spectra_for(descs: &[LatticeDescriptor], pol: PolarizationTag) -> Result<Vec<Vec<CollectiveState>>, AnalysisError> {
    descs.par_iter().map(|d| spectrum_for(*d, pol)).collect()
}

/// `lo, lo + step, ...` up to `hi`, with `hi` always included.
pub fn parameter_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if hi - g[n] > 1e-12 {
        g.push(hi);
    } else {
        g[n] = hi;
    }
    g
}

fn check_period_range(range: (f64, f64)) -> Result<(), AnalysisError> {
    let (lo, hi) = range;
    if !(lo > 0.1 && lo < hi && hi < 0.6) {
        return Err(AnalysisError::InvalidRequest(format!("period range ({lo}, {hi}) must satisfy 0.1 < lo < hi < 0.6")));
    }
    Ok(())
}

fn check_side(n: usize, max_side: usize) -> Result<(), AnalysisError> {
    if n > max_side {
        return Err(AnalysisError::InvalidRequest(format!("side count {n} exceeds the ceiling {max_side}")));
    }
    if n > MAX_SIDE {
        log::warn!("side count {n} is above {MAX_SIDE}; dense diagonalization cost grows as N^6");
    }
    Ok(())
}

impl TrackedBranch {
    /// `Err(TrackingLost)` at the first split.
    pub fn require_intact(&self) -> Result<(), AnalysisError> {
        match self.splits.first() {
            None => Ok(()),
            Some(&p) => {
                let i = self.parameters.iter().position(|&x| x == p).unwrap_or(1).max(1);
                let ov = self.overlaps[i.min(self.overlaps.len()) - 1];
                Err(AnalysisError::TrackingLost { label: self.label.clone(), parameter: p, overlap: ov })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Smallest overlap accepted between consecutive points.
    pub threshold: f64,
    /// Number of most subradiant states tracked from the upper end.
    pub branches: usize,
    /// States to track instead, each picked at the upper end.
    pub targets: Vec<BranchSelector>,
    pub max_side: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { threshold: 0.5, branches: 2, targets: Vec::new(), max_side: MAX_SIDE }
    }
}

/// Track states chosen at the upper period downwards through `samples`
/// equally spaced periods. Branches are returned in ascending period.
pub fn period_sweep(
    kind: LatticeKind,
    n: usize,
    pol: PolarizationTag,
    range: (f64, f64),
    samples: usize,
    opts: &SweepOptions,
) -> Result<Vec<TrackedBranch>, AnalysisError> {
    check_period_range(range)?;
    check_side(n, opts.max_side)?;
    if samples < 3 {
        return Err(AnalysisError::InvalidRequest(format!("need at least 3 samples, got {samples}")));
    }
    let (lo, hi) = range;
    let periods: Vec<f64> = (0..samples).map(|i| hi - (hi - lo) * i as f64 / (samples - 1) as f64).collect();
    let descs: Vec<LatticeDescriptor> = periods.iter().map(|&a| LatticeDescriptor::new(kind, n, a)).collect();
    let spectra = spectra_for(&descs, pol)?;
    let starts: Vec<usize> = if opts.targets.is_empty() {
        (0..opts.branches.min(spectra[0].len())).collect()
    } else {
        opts.targets
            .iter()
            .map(|sel| sel.select(&spectra[0]).ok_or_else(|| AnalysisError::BranchNotFound { selector: sel.to_string(), parameter: hi }))
            .collect::<Result<_, _>>()?
    };
    Ok(starts.into_iter().map(|b| track(&periods, &spectra, b, opts.threshold).reversed()).collect())
}

/// How the target state is identified at each period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchMode {
    /// Select at the upper end, then follow by overlap.
    Tracked,
    /// Reselect with the selector at every period (lower envelope).
    Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub grid_step: f64,
    /// Final bracket width in period.
    pub tolerance: f64,
    pub threshold: f64,
    pub mode: BranchMode,
    pub max_side: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { grid_step: 0.002, tolerance: 1e-4, threshold: 0.5, mode: BranchMode::Tracked, max_side: MAX_SIDE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodOptimum {
    pub period: f64,
    pub decay: f64,
    pub state: CollectiveState,
    /// The branch on the coarse grid, ascending in period.
    pub grid: TrackedBranch,
}

/// Coarse scan then golden-section refinement of the branch minimum.
pub fn optimize_period(
    kind: LatticeKind,
    n: usize,
    pol: PolarizationTag,
    selector: &BranchSelector,
    range: (f64, f64),
    opts: &OptimizeOptions,
) -> Result<PeriodOptimum, AnalysisError> {
    check_period_range(range)?;
    check_side(n, opts.max_side)?;
    let mut periods = parameter_grid(range.0, range.1, opts.grid_step);
    periods.reverse();
    let descs: Vec<LatticeDescriptor> = periods.iter().map(|&a| LatticeDescriptor::new(kind, n, a)).collect();
    let spectra = spectra_for(&descs, pol)?;
    let not_found = |p: f64| AnalysisError::BranchNotFound { selector: selector.to_string(), parameter: p };

    let branch = match opts.mode {
        BranchMode::Tracked => {
            let start = selector.select(&spectra[0]).ok_or_else(|| not_found(periods[0]))?;
            track(&periods, &spectra, start, opts.threshold)
        }
        BranchMode::Envelope => {
            let mut states = Vec::with_capacity(periods.len());
            for (p, s) in periods.iter().zip(&spectra) {
                states.push(s[selector.select(s).ok_or_else(|| not_found(*p))?].clone());
            }
            let overlaps = states.windows(2).map(|w| overlap(&w[0].amplitudes, &w[1].amplitudes)).collect();
            TrackedBranch { label: selector.to_string(), parameters: periods.clone(), states, overlaps, splits: Vec::new() }
        }
    }
    .reversed();

    let i = branch.argmin();
    if i == 0 || i + 1 == branch.len() {
        return Err(AnalysisError::NoInteriorMinimum { parameter: branch.parameters[i], decay: branch.states[i].decay });
    }

    let eval = |p: f64| -> Result<CollectiveState, AnalysisError> {
        let states = spectrum_for(LatticeDescriptor::new(kind, n, p), pol)?;
        match opts.mode {
            BranchMode::Tracked => {
                let nearest = (0..branch.len())
                    .min_by(|&a, &b| (branch.parameters[a] - p).abs().total_cmp(&(branch.parameters[b] - p).abs()))
                    .expect("grid is non-empty");
                let (k, ov) = best_match(&branch.states[nearest].amplitudes, &states);
                if ov < opts.threshold {
                    return Err(AnalysisError::TrackingLost { label: branch.label.clone(), parameter: p, overlap: ov });
                }
                Ok(states[k].clone())
            }
            BranchMode::Envelope => Ok(states[selector.select(&states).ok_or_else(|| not_found(p))?].clone()),
        }
    };

    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (branch.parameters[i - 1], branch.parameters[i + 1]);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut sc = eval(c)?;
    let mut sd = eval(d)?;
    while b - a > opts.tolerance {
        if sc.decay < sd.decay {
            b = d;
            d = c;
            sd = sc;
            c = b - g * (b - a);
            sc = eval(c)?;
        } else {
            a = c;
            c = d;
            sc = sd;
            d = a + g * (b - a);
            sd = eval(d)?;
        }
    }
    let (mut period, mut state) = if sc.decay < sd.decay { (c, sc) } else { (d, sd) };
    if branch.states[i].decay < state.decay {
        period = branch.parameters[i];
        state = branch.states[i].clone();
    }
    Ok(PeriodOptimum { period, decay: state.decay, state, grid: branch })
}

/// Period used for each size in a scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PeriodMode {
    Fixed(f64),
    /// Per-size optimum of the selector's lower envelope over the range.
    Optimized { range: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub geometry: LatticeKind,
    pub n: usize,
    pub n_tot: usize,
    pub period: f64,
    pub gamma_min: f64,
    pub branch: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    /// Fit of `gamma_min` against `n_tot` over all but the smallest `skipped` sizes.
    pub fit: PowerLawFit,
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub skip_smallest: usize,
    pub max_side: usize,
    pub optimize: OptimizeOptions,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            skip_smallest: 2,
            max_side: MAX_SIDE,
            optimize: OptimizeOptions { mode: BranchMode::Envelope, ..OptimizeOptions::default() },
        }
    }
}

/// Minimal decay of the selected branch for each size, with a power-law fit in `N_tot`.
pub fn scaling_sweep(
    kind: LatticeKind,
    pol: PolarizationTag,
    sizes: &[usize],
    mode: PeriodMode,
    selector: impl Fn(usize) -> BranchSelector + Sync,
    opts: &ScalingOptions,
) -> Result<ScalingResult, AnalysisError> {
    if sizes.len() < 4 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::InvalidRequest(format!("sizes must be ascending with at least 4 entries, got {sizes:?}")));
    }
    if sizes.len() < opts.skip_smallest + 2 {
        return Err(AnalysisError::InvalidRequest(format!("skipping {} of {} sizes leaves too few to fit", opts.skip_smallest, sizes.len())));
    }
    for &n in sizes {
        check_side(n, opts.max_side)?;
    }
    let rows: Vec<ScalingRow> = match mode {
        PeriodMode::Fixed(a) => {
            let descs: Vec<LatticeDescriptor> = sizes.iter().map(|&n| LatticeDescriptor::new(kind, n, a)).collect();
            let spectra = spectra_for(&descs, pol)?;
            sizes
                .iter()
                .zip(&descs)
                .zip(&spectra)
                .map(|((&n, d), s)| {
                    let sel = selector(n);
                    let k = sel.select(s).ok_or_else(|| AnalysisError::BranchNotFound { selector: sel.to_string(), parameter: a })?;
                    Ok(ScalingRow { geometry: kind, n, n_tot: d.total_count(), period: a, gamma_min: s[k].decay, branch: state_label(&s[k]) })
                })
                .collect::<Result<_, AnalysisError>>()?
        }
        PeriodMode::Optimized { range } => sizes
            .iter()
            .map(|&n| {
                let opt = optimize_period(kind, n, pol, &selector(n), range, &OptimizeOptions { max_side: opts.max_side, ..opts.optimize })?;
                Ok(ScalingRow {
                    geometry: kind,
                    n,
                    n_tot: LatticeDescriptor::new(kind, n, opt.period).total_count(),
                    period: opt.period,
                    gamma_min: opt.decay,
                    branch: state_label(&opt.state),
                })
            })
            .collect::<Result<_, AnalysisError>>()?,
    };
    let used = &rows[opts.skip_smallest..];
    let fit = fit_power_law(
        &used.iter().map(|r| r.n_tot as f64).collect::<Vec<_>>(),
        &used.iter().map(|r| r.gamma_min).collect::<Vec<_>>(),
    )?;
    Ok(ScalingResult { rows, fit, skipped: opts.skip_smallest })
}

/// Tracked A2-like and B2-like states of an `N x N` rectangular array
/// as `a_y / a_x` moves away from one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationResult {
    pub period_x: f64,
    /// Parameters are the ratios `a_y / a_x`, ascending.
    pub a2: TrackedBranch,
    pub b2: TrackedBranch,
}

impl DeformationResult {
    /// Largest `Gamma(r) / Gamma(1)` over `|r - 1| <= delta`.
    pub fn amplification(branch: &TrackedBranch, delta: f64) -> f64 {
        let base = branch
            .parameters
            .iter()
            .position(|&r| r == 1.0)
            .map(|i| branch.states[i].decay)
            .unwrap_or(f64::NAN);
        branch
            .parameters
            .iter()
            .zip(&branch.states)
            .filter(|(r, _)| (*r - 1.0).abs() <= delta + 1e-12)
            .map(|(_, s)| s.decay / base)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest deviation of `Gamma(r) / Gamma(1)` from one in either direction,
    /// as a factor `>= 1`.
    pub fn change_factor(branch: &TrackedBranch, delta: f64) -> f64 {
        let up = Self::amplification(branch, delta);
        let base = branch.parameters.iter().position(|&r| r == 1.0).map(|i| branch.states[i].decay).unwrap_or(f64::NAN);
        let down = branch
            .parameters
            .iter()
            .zip(&branch.states)
            .filter(|(r, _)| (*r - 1.0).abs() <= delta + 1e-12)
            .map(|(_, s)| base / s.decay)
            .fold(f64::NEG_INFINITY, f64::max);
        up.max(down)
    }
}

/// Ratios `1 - k h` and `1 + k h` on both sides of the square point.
pub fn deformation_sweep(
    n: usize,
    period_x: f64,
    ratio_range: (f64, f64),
    samples_per_side: usize,
    pol: PolarizationTag,
    opts: &SweepOptions,
) -> Result<DeformationResult, AnalysisError> {
    let (lo, hi) = ratio_range;
    if !(lo < 1.0 && hi > 1.0 && lo > 0.0) || samples_per_side == 0 {
        return Err(AnalysisError::InvalidRequest(format!("ratio range ({lo}, {hi}) must contain 1 with samples on both sides")));
    }
    check_side(n, opts.max_side)?;
    let m = samples_per_side;
    let down: Vec<f64> = (0..=m).map(|k| 1.0 - (1.0 - lo) * k as f64 / m as f64).collect();
    let up: Vec<f64> = (0..=m).map(|k| 1.0 + (hi - 1.0) * k as f64 / m as f64).collect();
    let all: Vec<f64> = down.iter().rev().chain(up.iter().skip(1)).cloned().collect();
    let descs: Vec<LatticeDescriptor> = all.iter().map(|&r| LatticeDescriptor::rectangular(n, n, period_x, period_x * r)).collect();
    let spectra = spectra_for(&descs, pol)?;
    let centre = m;
    let down_specs: Vec<Vec<CollectiveState>> = spectra[..=centre].iter().rev().cloned().collect();
    let up_specs = &spectra[centre..];

    let follow = |irrep: Irrep| -> Result<TrackedBranch, AnalysisError> {
        let sel = BranchSelector::irreps(&[irrep]);
        let start = sel
            .select(&spectra[centre])
            .ok_or_else(|| AnalysisError::BranchNotFound { selector: sel.to_string(), parameter: 1.0 })?;
        let left = track(&down, &down_specs, start, opts.threshold).reversed();
        let right = track(&up, up_specs, start, opts.threshold);
        let mut b = left;
        b.parameters.extend_from_slice(&right.parameters[1..]);
        b.states.extend_from_slice(&right.states[1..]);
        b.overlaps.extend_from_slice(&right.overlaps);
        b.splits.extend_from_slice(&right.splits);
        b.splits.sort_by(f64::total_cmp);
        Ok(b)
    };
    Ok(DeformationResult { period_x, a2: follow(Irrep::A2)?, b2: follow(Irrep::B2)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerRow {
    pub n: usize,
    pub q0: f64,
    /// `|psi^{(N,N)}_{1,1}|`.
    pub symmetric: f64,
    /// `|psi^{(N-2,N)-}|` next to the corner.
    pub antisymmetric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerAsymptotics {
    pub rows: Vec<CornerRow>,
    /// Power of `q0` for each column.
    pub symmetric_fit: PowerLawFit,
    pub antisymmetric_fit: PowerLawFit,
}

/// Closed-form corner amplitudes for even `N >= 6` and their power in `q0 = pi / (N + 1)`.
pub fn corner_asymptotics(sizes: &[usize]) -> Result<CornerAsymptotics, AnalysisError> {
    if let Some(bad) = sizes.iter().find(|&&n| n < 6 || n % 2 == 1) {
        return Err(AnalysisError::InvalidRequest(format!("corner asymptotics needs even N >= 6, got {bad}")));
    }
    let rows: Vec<CornerRow> = sizes
        .iter()
        .map(|&n| CornerRow {
            n,
            q0: discretization_wavevector(n),
            symmetric: corner_amplitude_symmetric(n).abs(),
            antisymmetric: corner_amplitude_antisymmetric(n).abs(),
        })
        .collect();
    let q: Vec<f64> = rows.iter().map(|r| r.q0).collect();
    Ok(CornerAsymptotics {
        symmetric_fit: fit_power_law(&q, &rows.iter().map(|r| r.symmetric).collect::<Vec<_>>())?,
        antisymmetric_fit: fit_power_law(&q, &rows.iter().map(|r| r.antisymmetric).collect::<Vec<_>>())?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = parameter_grid(0.26, 0.3, 0.002);
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[20]), (0.26, 0.3));
        let g = parameter_grid(0.25, 0.26, 0.003);
        assert_eq!(g.last(), Some(&0.26));
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn sweep_returns_ascending_branches() {
        let b = period_sweep(LatticeKind::Square, 4, PolarizationTag::SigmaZ, (0.3, 0.4), 6, &SweepOptions::default()).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b[0].parameters.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*b[0].parameters.last().unwrap(), 0.4);
        // the first branch ends on the most subradiant state at the upper period
        assert_eq!(b[0].states.last().unwrap().index, 0);
        let opts = SweepOptions { targets: vec![BranchSelector::checkerboard(4)], ..SweepOptions::default() };
        let t = period_sweep(LatticeKind::Square, 4, PolarizationTag::SigmaZ, (0.3, 0.4), 6, &opts).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].states.last().unwrap().dominant(), Some((4, 4)));
    }

    #[test]
    fn invalid_ranges_rejected() {
        let o = SweepOptions::default();
        assert!(period_sweep(LatticeKind::Square, 4, PolarizationTag::SigmaZ, (0.05, 0.4), 6, &o).is_err());
        assert!(period_sweep(LatticeKind::Square, 4, PolarizationTag::SigmaZ, (0.3, 0.65), 6, &o).is_err());
        assert!(period_sweep(LatticeKind::Square, 31, PolarizationTag::SigmaZ, (0.3, 0.4), 6, &o).is_err());
        assert!(deformation_sweep(4, 0.3, (1.0, 1.1), 3, PolarizationTag::SigmaZ, &o).is_err());
        assert!(corner_asymptotics(&[6, 7]).is_err());
    }

    #[test]
    fn boundary_minimum_reported() {
        // the 4x4 checkerboard only grows with period over this short window
        let r = optimize_period(
            LatticeKind::Square,
            4,
            PolarizationTag::SigmaZ,
            &BranchSelector::checkerboard(4),
            (0.40, 0.42),
            &OptimizeOptions { grid_step: 0.01, ..OptimizeOptions::default() },
        );
        assert!(matches!(r, Err(AnalysisError::NoInteriorMinimum { .. })), "{r:?}");
    }

    #[test]
    fn square_point_matches_plain_spectrum() {
        let d = deformation_sweep(6, 0.31, (0.99, 1.01), 2, PolarizationTag::SigmaZ, &SweepOptions::default()).unwrap();
        let sq = diagonalize(&build_hamiltonian(&generate_array(LatticeDescriptor::square(6, 0.31), PolarizationTag::SigmaZ).unwrap())).unwrap();
        let i = d.a2.parameters.iter().position(|&r| r == 1.0).unwrap();
        let a2 = sq.iter().find(|s| s.irrep == Irrep::A2).unwrap();
        let b2 = sq.iter().find(|s| s.irrep == Irrep::B2).unwrap();
        assert!((d.a2.states[i].decay - a2.decay).abs() < 1e-14);
        assert!((d.b2.states[i].decay - b2.decay).abs() < 1e-14);
        assert_eq!(DeformationResult::amplification(&d.a2, 0.0), 1.0);
    }

    #[test]
    fn corner_powers_on_closed_forms() {
        let c = corner_asymptotics(&[30, 32, 34, 36, 38, 40]).unwrap();
        assert!((c.symmetric_fit.exponent - 3.0).abs() < 0.02);
        assert!((c.antisymmetric_fit.exponent - 5.0).abs() < 0.05);
        assert_eq!(c.rows[0].n, 30);
    }
}
