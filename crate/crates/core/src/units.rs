//! Normalized units: `hbar = Gamma_0 = lambda_0 = 1`, so the free-space
//! wavenumber is `k_0 = 2 pi`. Frequencies are detunings in units of `Gamma_0`.

use std::f64::consts::PI;

/// Free-space wavenumber in units of `1 / lambda_0`.
pub const K0: f64 = 2.0 * PI;

/// Coupling prefactor `3 pi / k_0` between the Green's tensor and the Hamiltonian.
pub const COUPLING: f64 = 3.0 * PI / K0;

/// Resonant cross-section of a single emitter, `3 lambda_0^2 / (2 pi)`.
pub const SIGMA_SINGLE: f64 = 3.0 / (2.0 * PI);
