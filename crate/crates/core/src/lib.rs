//! Design and evaluation of one-dimensional composite complex absorbing
//! potentials.
//!
//! Everything is dimensionless: lengths are measured in units of the first
//! unit's width and energies in units of ħ²/(2m d²), so the stationary
//! equation reads `ψ'' + (k² − V) ψ = 0`.
//!
//! * [`transfer`] evaluates piecewise-constant chains exactly with 2×2
//!   transfer matrices, including analytic parameter gradients.
//! * [`compose`] combines the amplitudes of two contiguous units by summing
//!   all multiple-reflection paths.
//! * [`inversion`] builds potentials that absorb perfectly at a list of
//!   wavenumbers, one polynomial unit per wavenumber.
//! * [`optimize`] tunes the complex heights of N equal square barriers to
//!   minimise the summed survival over a set of wavenumbers.
//! * [`baseline`] is the conventional `−iηx²` absorber with optimised η.

pub mod baseline;
pub mod compose;
pub mod error;
pub mod inversion;
pub mod optimize;
pub mod scatter;
pub mod transfer;

pub use error::{CapError, Result};
pub use num_complex::Complex64;
pub use scatter::{
    survival, BarrierChain, SampledPotential, ScatteringAmplitudes, SquareBarrier, Wavenumber,
};
