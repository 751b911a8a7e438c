//! Tightly focused vortex beams with circular input polarization.
//!
//! Aplanatic (Richards-Wolf) focusing of the pupil field
//! `A(theta) e^{i l phi} (e_x + i s e_y) / sqrt 2`, apodized by
//! `A(theta) = exp(-beta^2 sin^2 theta / NA^2)`. In the focal plane
//!
//! ```text
//! E_z      = -i^J     e^{iJ phi}     int w sin(theta)/sqrt2       J_J     (k0 rho sin theta) dtheta
//! e+^* . E =  i^(J-1) e^{i(J-1) phi} int w (cos theta + s)/2      J_{J-1} (k0 rho sin theta) dtheta
//! e-^* . E =  i^(J+1) e^{i(J+1) phi} int w (cos theta - s)/2      J_{J+1} (k0 rho sin theta) dtheta
//! ```
//!
//! with `J = l + s` and `w = A(theta) sqrt(cos theta) sin theta`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::quadrature::integrate;
use crate::special::bessel_j;
use crate::units::K0;

const QUAD_REL_TOL: f64 = 1e-8;
const QUAD_MAX_INTERVALS: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamError {
    #[error("invalid beam parameters: {0}")]
    InvalidParams(String),
    #[error("focusing integral not converged at rho = {rho}: error {error:.3e} on value {value:.3e}")]
    QuadratureNotConverged { rho: f64, value: f64, error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    /// Orbital charge of the pupil vortex.
    pub l: i32,
    /// Spin of the circular input polarization, `+1` or `-1`.
    pub s: i32,
    /// Numerical aperture in `(0, 1]`.
    pub na: f64,
    /// Pupil radius over Gaussian waist.
    pub beta: f64,
    pub amplitude: f64,
}

impl BeamParams {
    pub fn new(l: i32, s: i32) -> Self {
        Self { l, s, na: 1.0, beta: 0.5, amplitude: 1.0 }
    }

    /// Total angular momentum `J = l + s`, the winding of `E_z`.
    pub fn total_j(&self) -> i32 {
        self.l + self.s
    }

    pub fn validate(&self) -> Result<(), BeamError> {
        if self.s != 1 && self.s != -1 {
            return Err(BeamError::InvalidParams(format!("spin must be +1 or -1, got {}", self.s)));
        }
        if !(self.na > 0.0 && self.na <= 1.0) {
            return Err(BeamError::InvalidParams(format!("numerical aperture {} outside (0, 1]", self.na)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(BeamError::InvalidParams(format!("pupil ratio {} must be positive", self.beta)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(BeamError::InvalidParams(format!("amplitude {} must be positive", self.amplitude)));
        }
        Ok(())
    }
}

/// Focal-plane field of one beam, axis at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselBeam {
    pub params: BeamParams,
    pub center: [f64; 2],
    /// `max |E_z|` over the focal plane.
    pub peak_ez: f64,
    /// Distance from the axis where `|E_z|` peaks.
    pub peak_radius: f64,
    /// Winding of `E_z` measured on the circle through the peak.
    pub measured_winding: i32,
}

impl BesselBeam {
    pub fn new(params: BeamParams) -> Result<Self, BeamError> {
        params.validate()?;
        let mut beam = Self { params, center: [0.0, 0.0], peak_ez: 0.0, peak_radius: 0.0, measured_winding: 0 };
        let (radius, peak) = beam.locate_peak()?;
        beam.peak_radius = radius;
        beam.peak_ez = peak;
        beam.measured_winding = beam.winding_on_circle(radius.max(1e-3), 8 * (params.total_j().unsigned_abs() as usize) + 32)?;
        Ok(beam)
    }

    pub fn centered_at(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }

    pub fn winding_matches(&self) -> bool {
        self.measured_winding == self.params.total_j()
    }

    /// Radial integrals `(I_z, I_+, I_-)` at distance `rho` from the axis.
    pub fn radial(&self, rho: f64) -> Result<[f64; 3], BeamError> {
        let p = &self.params;
        let j = p.total_j();
        let s = p.s as f64;
        let theta_max = p.na.asin();
        let weight = move |t: f64| {
            let (st, ct) = t.sin_cos();
            (-(p.beta * st / p.na).powi(2)).exp() * ct.max(0.0).sqrt() * st
        };
        let one = |order: i32, factor: &dyn Fn(f64) -> f64| -> Result<f64, BeamError> {
            let f = |t: f64| weight(t) * factor(t) * bessel_j(order, K0 * rho * t.sin());
            match integrate(f, 0.0, theta_max, QUAD_REL_TOL, 1e-14, QUAD_MAX_INTERVALS) {
                Ok(r) => Ok(r.value),
                Err(r) => Err(BeamError::QuadratureNotConverged { rho, value: r.value, error: r.error }),
            }
        };
        Ok([
            one(j, &|t: f64| t.sin() * FRAC_1_SQRT_2)?,
            one(j - 1, &|t: f64| 0.5 * (t.cos() + s))?,
            one(j + 1, &|t: f64| 0.5 * (t.cos() - s))?,
        ])
    }

    /// Cartesian field at `(x, y, 0)`.
    pub fn field(&self, x: f64, y: f64) -> Result<[Complex64; 3], BeamError> {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        let rho = dx.hypot(dy);
        let phi = dy.atan2(dx);
        let j = self.params.total_j();
        let [iz, ip, im] = self.radial(rho)?;
        let a = self.params.amplitude;
        let ez = -a * i_pow(j) * Complex64::from_polar(1.0, j as f64 * phi) * iz;
        let ep = a * i_pow(j - 1) * Complex64::from_polar(1.0, (j - 1) as f64 * phi) * ip;
        let em = a * i_pow(j + 1) * Complex64::from_polar(1.0, (j + 1) as f64 * phi) * im;
        // E = E+ e+ + E- e- + Ez z with e+- = (x +- i y)/sqrt 2
        let i = Complex64::new(0.0, 1.0);
        Ok([(ep + em) * FRAC_1_SQRT_2, i * (ep - em) * FRAC_1_SQRT_2, ez])
    }

    /// Scan outwards in `rho` past the first rings, then refine by golden section.
    fn locate_peak(&self) -> Result<(f64, f64), BeamError> {
        let j = self.params.total_j().unsigned_abs() as f64;
        let rho_max = 1.5 * (j + 6.0) / (K0 * self.params.na);
        let step = 0.005;
        let n = (rho_max / step).ceil() as usize;
        let mut best = (0.0, self.radial(0.0)?[0].abs());
        for i in 1..=n {
            let rho = i as f64 * step;
            let v = self.radial(rho)?[0].abs();
            if v > best.1 {
                best = (rho, v);
            }
        }
        if best.0 == 0.0 {
            return Ok(best);
        }
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = ((best.0 - step).max(0.0), best.0 + step);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.radial(c)?[0].abs();
        let mut fd = self.radial(d)?[0].abs();
        while b - a > 1e-9 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.radial(c)?[0].abs();
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.radial(d)?[0].abs();
            }
        }
        let rho = 0.5 * (a + b);
        Ok((rho, self.radial(rho)?[0].abs()))
    }

    /// Net phase advance of `E_z` around a circle, in turns.
    pub fn winding_on_circle(&self, radius: f64, samples: usize) -> Result<i32, BeamError> {
        let mut total = 0.0;
        let mut prev: Option<f64> = None;
        for k in 0..=samples {
            let phi = 2.0 * PI * k as f64 / samples as f64;
            let [_, _, ez] = self.field(self.center[0] + radius * phi.cos(), self.center[1] + radius * phi.sin())?;
            let arg = ez.arg();
            if let Some(p) = prev {
                total += crate::special::wrap_angle(arg - p);
            }
            prev = Some(arg);
        }
        Ok((total / (2.0 * PI)).round() as i32)
    }
}

/// `i^n` for any integer `n`.
fn i_pow(n: i32) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
