//! Free-space dyadic Green's tensor projected on a fixed dipole orientation.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::PolarizationTag;
use crate::units::K0;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GreenError {
    #[error("the Green's tensor is singular at zero displacement")]
    ZeroDisplacement,
}

/// Transverse and longitudinal scalar parts of `G(R)` for `|R| = r > 0`:
/// `G = a I + b R R / r^2`.
#[inline]
pub fn green_scalars(r: f64) -> (Complex64, Complex64) {
    let x = K0 * r;
    let (s, c) = x.sin_cos();
    let pre = 1.0 / (4.0 * PI * r * x * x);
    let f = if x > 0.5 { s - x * c } else { sin_minus_x_cos_series(x) };
    let a = Complex64::new((x * x - 1.0) * c - x * s, x * x * s - f) * pre;
    let b = Complex64::new((3.0 - x * x) * c + 3.0 * x * s, 3.0 * f - x * x * s) * pre;
    (a, b)
}

/// `sin x - x cos x` by its Taylor series, for `|x| <= 0.5`.
fn sin_minus_x_cos_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x * x2 / 3.0;
    let mut sum = term;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs() {
        // ratio of consecutive terms (-1)^{k+1} 2k x^{2k+1} / (2k+1)!
        term *= -x2 * (k + 1.0) / (k * (2.0 * k + 2.0) * (2.0 * k + 3.0));
        sum += term;
        k += 1.0;
    }
    sum
}

/// `e_d^* . G(R) . e_d` for an in-plane displacement.
///
/// For `SigmaZ` this is `G_zz`; for either circular tag it is `(G_xx + G_yy) / 2`,
/// because the antisymmetric cross terms cancel for a symmetric tensor.
#[inline]
pub fn projected_scalar(r: f64, polarization: PolarizationTag) -> Complex64 {
    let (a, b) = green_scalars(r);
    match polarization {
        PolarizationTag::SigmaZ => a,
        PolarizationTag::SigmaPlus | PolarizationTag::SigmaMinus => a + 0.5 * b,
    }
}

/// Projected Green's function for the displacement `(dx, dy)` (units of lambda_0).
/// The contact (delta) term is never included.
pub fn green_projected(dx: f64, dy: f64, polarization: PolarizationTag) -> Result<Complex64, GreenError> {
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(GreenError::ZeroDisplacement);
    }
    Ok(projected_scalar(r, polarization))
}

/// Full Cartesian tensor `G(R)` for an in-plane displacement, row-major.
pub fn green_tensor(dx: f64, dy: f64) -> Result<[[Complex64; 3]; 3], GreenError> {
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(GreenError::ZeroDisplacement);
    }
    let (a, b) = green_scalars(r);
    let u = [dx / r, dy / r, 0.0];
    let mut g = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = b * (u[i] * u[j]);
            if i == j {
                g[i][j] += a;
            }
        }
    }
    Ok(g)
}
