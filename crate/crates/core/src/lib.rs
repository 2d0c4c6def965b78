//! Scattering of time-harmonic plane waves by random periodic perfectly
//! conducting surfaces, and reconstruction of the surface statistics from
//! multi-frequency near-field data.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs and an explicit random stream; IO, configuration
//! files, and parallel scheduling live in the `grating-uq` companion crate.
//!
//! Module map:
//!
//! - [`surface`]: Gaussian covariance model, Karhunen-Loève basis, surface
//!   sampling and Fourier-series profiles.
//! - [`wavefield`]: incident plane waves, the Rayleigh mode lattice and the
//!   quasi-periodic Green's function.
//! - [`forward`]: least-squares Rayleigh collocation solver and synthetic
//!   noisy measurements.
//! - [`inverse`]: trace extraction, the boundary-mismatch objective and its
//!   Jacobian, Landweber iteration and frequency continuation.
//! - [`uq`]: Monte Carlo ensemble, covariance eigenvalues, and recovery of
//!   the root mean square and correlation length.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod presets;
pub mod surface;
pub mod uq;
pub mod wavefield;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `n` points `x_j = j * period / n`, `j = 0..n`.
pub fn uniform_grid(n: usize, period: f64) -> alloc::vec::Vec<f64> {
    let h = period / n as f64;
    (0..n).map(|j| j as f64 * h).collect()
}
