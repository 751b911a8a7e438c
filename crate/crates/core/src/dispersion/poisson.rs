//! Poisson-resummed lattice sum for out-of-plane (`SigmaZ`) dipoles.
//!
//! Three pieces: the row through the origin in closed form via `Li_1..Li_3`,
//! the remaining rows for evanescent orders `|k_x^{(m)}| > k0` as Macdonald
//! series, and the propagating orders as a regularized spectral series in `n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{anomaly_distance, BlochVector, DipoleSum, DispersionError, SumMethod, Truncation};
use crate::geometry::PolarizationTag;
use crate::special::{bessel_k01, polylog_unit_circle, EULER_GAMMA, ZETA_3};
use crate::units::K0;

/// Argument beyond which `K_0, K_1` are dropped (`e^{-45}` ~ 3e-20).
const K_CUTOFF: f64 = 45.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonOptions {
    /// Target bound on the absolute truncation error of `C`.
    pub tolerance: f64,
    /// Anomaly margin in units of `2 pi / min(ax, ay)`.
    pub anomaly_margin: f64,
    /// Fixed number of terms in the propagating-order series; adaptive when `None`.
    pub n_range: Option<usize>,
    pub max_terms: usize,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12, anomaly_margin: 1e-4, n_range: None, max_terms: 1_000_000 }
    }
}

/// `i k_z = sqrt(kx^2 + ky^2 - k0^2)` with `Re >= 0`, and `Im <= 0` on the imaginary axis.
pub fn ikz(kx: f64, ky: f64) -> Complex64 {
    let v = kx * kx + ky * ky - K0 * K0;
    if v >= 0.0 {
        Complex64::new(v.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-v).sqrt())
    }
}

pub fn dipole_sum_poisson_z(k: BlochVector, ax: f64, ay: f64, opts: &PoissonOptions) -> Result<DipoleSum, DispersionError> {
    if !(ax > 0.0 && ay > 0.0 && ax.is_finite() && ay.is_finite()) {
        return Err(DispersionError::InvalidParameters(format!("periods ({ax}, {ay}) must be positive")));
    }
    let margin = opts.anomaly_margin * 2.0 * PI / ax.min(ay);
    let distance = anomaly_distance(k, ax, ay);
    if distance < margin {
        return Err(DispersionError::AnomalyProximity { kx: k.kx, ky: k.ky, distance, margin });
    }

    let mut value = origin_row(k.kx, ax);
    let mut tail = 0.0;
    let mut n_max = 0usize;

    let gx = 2.0 * PI / ax;
    let m0 = (-k.kx / gx).round() as i64;
    let (mut m_lo, mut m_hi) = (m0, m0);
    for dir in [1i64, -1] {
        let mut m = if dir == 1 { m0 } else { m0 - 1 };
        loop {
            let kxm = k.kx + gx * m as f64;
            if kxm.abs() > K0 {
                let p = (kxm * kxm - K0 * K0).sqrt();
                if p * ay > K_CUTOFF {
                    // every further order is smaller still; bound them geometrically
                    let (_, k1) = bessel_k01(p * ay);
                    tail += (K0 * K0 + p / ay) * k1 / (1.0 - (-gx * ay).exp()) / (PI * ax * K0 * K0);
                    break;
                }
                let (v, t, n) = evanescent_order(p, k.ky, ay);
                value += v / (PI * ax * K0 * K0);
                tail += t / (PI * ax * K0 * K0);
                n_max = n_max.max(n);
            } else {
                let (v, t, n) = propagating_order(kxm, k.ky, ay, opts, 2.0 * PI * ax * K0 * K0)?;
                value += v / (2.0 * PI * ax * K0 * K0);
                tail += t;
                n_max = n_max.max(n);
            }
            m_lo = m_lo.min(m);
            m_hi = m_hi.max(m);
            m += dir;
        }
    }

    if tail > opts.tolerance && opts.n_range.is_none() {
        return Err(DispersionError::TruncationNotConverged { tail, tolerance: opts.tolerance, terms: n_max });
    }
    Ok(DipoleSum {
        value,
        k,
        polarization: PolarizationTag::SigmaZ,
        method: SumMethod::PoissonZ,
        truncation: Truncation { m_range: Some((m_lo, m_hi)), n_max: Some(n_max), ..Truncation::default() },
        error_estimate: tail,
        period_x: ax,
        period_y: ay,
    })
}

/// Row `y = 0` summed in closed form.
fn origin_row(kx: f64, ax: f64) -> Complex64 {
    let u = K0 * ax;
    let mut s = Complex64::new(0.0, 0.0);
    for eps in [1.0, -1.0] {
        let [li1, li2, li3] = polylog_unit_circle(ax * (K0 + eps * kx));
        s += li1 + Complex64::new(0.0, 1.0 / u) * li2 - li3 / (u * u);
    }
    s / (4.0 * PI * ax)
}

/// `sum_{n>=1} [k0^2 K_0(p ay n) - p/(ay n) K_1(p ay n)] cos(ky n ay)` with its tail bound.
fn evanescent_order(p: f64, ky: f64, ay: f64) -> (Complex64, f64, usize) {
    let mut s = 0.0;
    let mut n = 1usize;
    loop {
        let x = p * ay * n as f64;
        if x > K_CUTOFF {
            let (_, k1) = bessel_k01(x);
            let tail = (K0 * K0 + p / (ay * n as f64)) * k1 / (1.0 - (-p * ay).exp());
            return (Complex64::new(s, 0.0), tail, n - 1);
        }
        let (k0v, k1v) = bessel_k01(x);
        s += (K0 * K0 * k0v - p / (ay * n as f64) * k1v) * (ky * ay * n as f64).cos();
        n += 1;
    }
}

/// Regularized spectral series for an order with `|k_x^{(m)}| < k0`.
/// Returns the bracketed sum, the tail bound already divided by `scale`, and the last `n`.
fn propagating_order(
    kxm: f64,
    ky: f64,
    ay: f64,
    opts: &PoissonOptions,
    scale: f64,
) -> Result<(Complex64, f64, usize), DispersionError> {
    let k2 = K0 * K0;
    let p2 = kxm * kxm - k2;
    let s = (-p2).sqrt();
    let quartic = 4.0 * k2 * (2.0 * ky * ky - p2) + p2 * (4.0 * ky * ky - p2);
    let gy = 2.0 * PI / ay;

    let log = Complex64::new((s * ay / (4.0 * PI)).ln() + EULER_GAMMA, -PI / 2.0);
    let kz0 = ikz(kxm, ky);
    let mut total = (k2 + p2 / 2.0) * log - p2 / 4.0 - ky * ky / 2.0 - PI * PI / (3.0 * ay * ay)
        + ZETA_3 * ay * ay / (32.0 * PI * PI) * quartic
        + (PI / ay) * (kz0 + k2 / kz0);

    let term = |n: usize| -> Complex64 {
        let nf = n as f64;
        let (up, um) = (ky + gy * nf, ky - gy * nf);
        let (kp, km) = (ikz(kxm, up), ikz(kxm, um));
        // kz - |u| = p^2 / (kz + |u|) avoids cancelling two large numbers
        let spectral = k2 / kp + k2 / km + p2 / (kp + up.abs()) + p2 / (km + um.abs());
        (PI / ay) * spectral + (PI / ay) * (up.abs() + um.abs() - 2.0 * gy * nf)
            - k2 / nf
            - p2 / (2.0 * nf)
            - ay * ay / (32.0 * PI * PI * nf * nf * nf) * quartic
    };

    // terms fall off as n^-5 once 2 pi n / ay dominates k0 and |ky|
    let asymptotic = ((4.0 * K0.max(ky.abs()) / gy).ceil() as usize).max(8);
    let mut n = 1usize;
    let tail = loop {
        let t = term(n);
        total += t;
        let bound = t.norm() * n as f64 / 2.0 / scale;
        match opts.n_range {
            Some(limit) if n >= limit => break bound,
            None if n >= asymptotic && bound < 0.1 * opts.tolerance => break bound,
            None if n >= opts.max_terms => {
                return Err(DispersionError::TruncationNotConverged { tail: bound, tolerance: opts.tolerance, terms: n })
            }
            _ => {}
        }
        n += 1;
    };
    Ok((total, tail, n))
}
