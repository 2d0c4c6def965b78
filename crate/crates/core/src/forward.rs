//! Direct scattering by a perfectly conducting periodic surface and
//! synthesis of noisy near-field measurements.
//!
//! The scattered field is expanded in the Rayleigh modes `exp(iα_n x + iβ_n y)`
//! referenced to `y = 0`; the amplitudes are fitted so the total field
//! vanishes on the surface in the least-squares sense over a uniform set of
//! collocation points.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::linalg::{least_squares, CMatrix};
use crate::surface::Profile;
use crate::wavefield::{make_modes, ModeSet, PlaneWave};
use crate::{uniform_grid, Error, Result};

/// Collocation points per unknown when the caller does not choose.
pub const DEFAULT_COLLOCATION_FACTOR: usize = 4;

/// Forward truncation order used to synthesize data.
pub const DEFAULT_FORWARD_ORDER: usize = 48;

/// Condition estimate above which the collocation system is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Rayleigh amplitudes `ψ_n` of the scattered field.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighCoeffs {
    pub psi: Vec<Complex64>,
    pub modes: ModeSet,
}

impl RayleighCoeffs {
    /// Scattered field `Σ ψ_n exp(iα_n x + iβ_n y)` at a point above the surface.
    pub fn field(&self, x: f64, y: f64) -> Complex64 {
        self.psi
            .iter()
            .zip(self.modes.alpha())
            .zip(self.modes.beta())
            .map(|((&p, &a), &b)| p * (Complex64::new(0.0, a * x) + Complex64::i() * b * y).exp())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSolution {
    pub coeffs: RayleighCoeffs,
    /// RMS of the total field over the collocation points.
    pub residual_rms: f64,
    /// `Σ e_n - 1`.
    pub energy_defect: f64,
    pub condition_estimate: f64,
}

/// Fit `ψ_{-N..N}` so that `Σ ψ_n e^{iα_n x + iβ_n f(x)} + e^{iαx - iβf(x)}`
/// vanishes at `q_colloc` uniform points on one period.
pub fn solve_forward<P: Profile + ?Sized>(
    surface: &P,
    pw: &PlaneWave,
    order: usize,
    q_colloc: usize,
    wood_eps: f64,
) -> Result<ForwardSolution> {
    let modes = make_modes(pw, surface.period(), order, wood_eps)?;
    let unknowns = modes.len();
    if q_colloc < 2 * unknowns {
        return Err(Error::invalid(alloc::format!(
            "{q_colloc} collocation points for {unknowns} unknowns; need at least {}",
            2 * unknowns
        )));
    }
    let grid = uniform_grid(q_colloc, surface.period());
    let heights = surface.sample_on(&grid);
    let mut a = CMatrix::zeros(q_colloc, unknowns);
    for (j, (&alpha_n, &beta_n)) in modes.alpha().iter().zip(modes.beta()).enumerate() {
        let col = a.column_mut(j);
        for (q, (&x, &f)) in grid.iter().zip(&heights).enumerate() {
            col[q] = (Complex64::new(0.0, alpha_n * x) + Complex64::i() * beta_n * f).exp();
        }
    }
    let rhs: Vec<Complex64> = grid
        .iter()
        .zip(&heights)
        .map(|(&x, &f)| -Complex64::new(0.0, pw.alpha * x - pw.beta * f).exp())
        .collect();
    let ls = least_squares(&a, &rhs, MAX_CONDITION)?;
    let fitted = a.mul_vec(&ls.solution);
    let residual_rms = (fitted
        .iter()
        .zip(&rhs)
        .map(|(u, r)| (u - r).norm_sqr())
        .sum::<f64>()
        / q_colloc as f64)
        .sqrt();
    let coeffs = RayleighCoeffs {
        psi: ls.solution,
        modes,
    };
    let energy_defect = reflection_efficiencies(&coeffs).iter().sum::<f64>() - 1.0;
    Ok(ForwardSolution {
        coeffs,
        residual_rms,
        energy_defect,
        condition_estimate: ls.condition_estimate,
    })
}

/// Grating efficiencies `e_n = (Re β_n / β)|ψ_n|²` (zero for evanescent modes).
pub fn reflection_efficiencies(rc: &RayleighCoeffs) -> Vec<f64> {
    let beta = rc.modes.wave().beta;
    (0..rc.modes.len())
        .map(|i| {
            if rc.modes.is_propagating(i) {
                rc.modes.beta()[i].re / beta * rc.psi[i].norm_sqr()
            } else {
                0.0
            }
        })
        .collect()
}

/// Single-layer density coefficients `φ_n = -2iβ_n u_n e^{-iβ_n y0}` that
/// reproduce the trace through the quasi-periodic Green's function
/// normalized as `(i/2Λ) Σ β_n⁻¹ ...`.
pub fn density_coefficients(u_n: &[Complex64], modes: &ModeSet, y0: f64) -> Vec<Complex64> {
    u_n.iter()
        .zip(modes.beta())
        .map(|(&u, &b)| Complex64::new(0.0, -2.0) * b * u * (-Complex64::i() * b * y0).exp())
        .collect()
}

/// Sampled scattered field on the line `y = y0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub kappa: f64,
    pub theta: f64,
    pub y0: f64,
    pub lambda_period: f64,
    pub tau: f64,
    /// `u(x_j, y0)` at `x_j = jΛ/Q`.
    pub values: Vec<Complex64>,
}

impl Measurement {
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.values.len(), self.lambda_period)
    }
}

/// Evaluate the Rayleigh series on `Q` uniform points at height `y0` and
/// apply multiplicative noise `1 + τ·r_j`, `r_j ~ U[-1, 1]`.
pub fn synthesize_measurement<R: Rng + ?Sized>(
    rc: &RayleighCoeffs,
    y0: f64,
    surface_max: f64,
    q: usize,
    tau: f64,
    rng: &mut R,
) -> Result<Measurement> {
    if !(y0 > surface_max) {
        return Err(Error::MeasurementBelowSurface { y0, surface_max });
    }
    if !q.is_power_of_two() || q < 8 {
        return Err(Error::invalid(alloc::format!(
            "measurement grid size {q} must be a power of two >= 8"
        )));
    }
    if !(tau >= 0.0) {
        return Err(Error::invalid("noise level must be non-negative"));
    }
    let period = rc.modes.period();
    let lifted: Vec<Complex64> = rc
        .psi
        .iter()
        .zip(rc.modes.beta())
        .map(|(&p, &b)| p * (Complex64::i() * b * y0).exp())
        .collect();
    let values = uniform_grid(q, period)
        .into_iter()
        .map(|x| {
            let u: Complex64 = lifted
                .iter()
                .zip(rc.modes.alpha())
                .map(|(&c, &a)| c * Complex64::new(0.0, a * x).exp())
                .sum();
            if tau > 0.0 {
                u * (1.0 + tau * rng.random_range(-1.0..=1.0))
            } else {
                u
            }
        })
        .collect();
    let wave = rc.modes.wave();
    Ok(Measurement {
        kappa: wave.kappa,
        theta: wave.theta,
        y0,
        lambda_period: period,
        tau,
        values,
    })
}

/// Measurement height: surface maximum plus `standoff`, rounded up to one
/// decimal.
pub fn measurement_height(surface_max: f64, standoff: f64) -> f64 {
    let y = ((surface_max + standoff) * 10.0).ceil() / 10.0;
    if y > surface_max {
        y
    } else {
        y + 0.1
    }
}
