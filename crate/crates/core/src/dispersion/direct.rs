//! Damped real-space lattice sum extrapolated to zero damping.
//!
//! `C_eta(k) = sum_{R != 0} e^{-eta R} g(R) e^{i k . R}` is analytic in `eta`
//! inside a disc whose radius is the distance of `|k + G|` from the light
//! circle, so polynomial extrapolation to `eta = 0` converges geometrically
//! below the light line.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BlochVector, DipoleSum, DispersionError, SumMethod, Truncation};
use crate::geometry::PolarizationTag;
use crate::green::projected_scalar;
use crate::units::K0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    /// Damping constants in units of `k0`, strictly decreasing.
    pub etas: Vec<f64>,
    /// Sum radius in units of `1 / eta_min`, used when `r_max` is not set.
    pub r_max_factor: f64,
    pub r_max: Option<f64>,
    pub min_sites: usize,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            // integer multiples of 0.2 / 32, ratios alternating 4/3 and 3/2
            etas: [32.0, 24.0, 16.0, 12.0, 8.0, 6.0, 4.0, 3.0, 2.0].iter().map(|m| m * 0.2 / 32.0).collect(),
            r_max_factor: 30.0,
            r_max: None,
            min_sites: 10_000,
        }
    }
}

pub fn dipole_sum_damped_direct(
    k: BlochVector,
    polarization: PolarizationTag,
    ax: f64,
    ay: f64,
    opts: &DirectOptions,
) -> Result<DipoleSum, DispersionError> {
    if !(ax > 0.0 && ay > 0.0) {
        return Err(DispersionError::InvalidParameters(format!("periods ({ax}, {ay}) must be positive")));
    }
    if opts.etas.len() < 2 || opts.etas.windows(2).any(|w| !(w[1] < w[0])) || opts.etas.iter().any(|&e| !(e > 0.0)) {
        return Err(DispersionError::InvalidParameters("damping sequence must be positive and strictly decreasing".into()));
    }
    let etas: Vec<f64> = opts.etas.iter().map(|e| e * K0).collect();
    let eta_min = etas[etas.len() - 1];
    let r_max = opts.r_max.unwrap_or(opts.r_max_factor / eta_min);
    let mx = (r_max / ax).floor() as i64;

    // When every eta is a small integer multiple of one unit, all damping
    // factors are powers of a single exponential.
    let unit = (1..=4).map(|d| eta_min / d as f64).find(|&u| {
        etas.iter().all(|&e| {
            let m = e / u;
            (m - m.round()).abs() < 1e-9 && m.round() <= 64.0
        })
    });
    let powers: Option<Vec<i32>> = unit.map(|u| etas.iter().map(|&e| (e / u).round() as i32).collect());

    // half plane (i > 0, or i == 0 and j > 0); the partner -R contributes the conjugate phase
    let (sums, sites) = (0..=mx)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * ax;
            let mut acc = vec![Complex64::new(0.0, 0.0); etas.len()];
            let mut damp = vec![0.0; etas.len()];
            let mut count = 0usize;
            let span = ((r_max * r_max - x * x).max(0.0).sqrt() / ay).floor() as i64;
            let j_lo = if i == 0 { 1 } else { -span };
            // Bloch phase advanced by a fixed rotation per step in y
            let step = Complex64::from_polar(1.0, k.ky * ay);
            let mut phase = Complex64::from_polar(1.0, k.kx * x + k.ky * j_lo as f64 * ay);
            for j in j_lo..=span {
                if (j - j_lo) % 64 == 0 {
                    phase = Complex64::from_polar(1.0, k.kx * x + k.ky * j as f64 * ay);
                }
                let r = x.hypot(j as f64 * ay);
                if r > r_max {
                    phase *= step;
                    continue;
                }
                match (&powers, unit) {
                    (Some(p), Some(u)) => {
                        let h = (-u * r).exp();
                        damp.iter_mut().zip(p).for_each(|(d, &q)| *d = h.powi(q));
                    }
                    _ => damp.iter_mut().zip(&etas).for_each(|(d, &e)| *d = (-e * r).exp()),
                }
                let w = projected_scalar(r, polarization) * (2.0 * phase.re);
                acc.iter_mut().zip(&damp).for_each(|(a, &d)| *a += w * d);
                count += 2;
                phase *= step;
            }
            (acc, count)
        })
        .reduce(
            || (vec![Complex64::new(0.0, 0.0); etas.len()], 0),
            |(mut a, ca), (b, cb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, ca + cb)
            },
        );

    if sites < opts.min_sites {
        return Err(DispersionError::InvalidParameters(format!("only {sites} sites inside R_max = {r_max}")));
    }
    let (value, error_estimate) = extrapolate_to_zero(&etas, &sums)?;
    Ok(DipoleSum {
        value,
        k,
        polarization,
        method: SumMethod::DampedDirect,
        truncation: Truncation { etas, r_max: Some(r_max), sites: Some(sites), ..Truncation::default() },
        error_estimate,
        period_x: ax,
        period_y: ay,
    })
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`. Successive estimates are
/// built from the smallest abscissae upwards; their last difference is the
/// error estimate, and any growth in the differences above round-off marks
/// the table as unstable.
pub fn extrapolate_to_zero(x: &[f64], y: &[Complex64]) -> Result<(Complex64, f64), DispersionError> {
    let n = x.len();
    let mut p: Vec<Complex64> = y.to_vec();
    let mut estimates = vec![p[n - 1]];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (x[i] * p[i + 1] - x[i + m] * p[i]) / (x[i] - x[i + m]);
        }
        estimates.push(p[n - 1 - m]);
    }
    let differences: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let value = estimates[n - 1];
    let floor = 1e-11 * value.norm().max(1e-300);
    let last = differences[differences.len() - 1];
    if differences.windows(2).any(|w| w[1] > w[0] && w[1] > floor) {
        return Err(DispersionError::ExtrapolationUnstable { differences });
    }
    Ok((value, last.max(f64::EPSILON * value.norm())))
}
