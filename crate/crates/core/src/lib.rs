//! Subradiant collective states of finite and infinite planar atomic arrays.

pub mod analysis;
pub mod dispersion;
pub mod geometry;
pub mod green;
pub mod hamiltonian;
pub mod scattering;
pub mod special;
pub mod spectrum;
pub mod units;
