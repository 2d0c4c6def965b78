//! Plane-wave incidence, the Rayleigh mode lattice, and the quasi-periodic
//! Green's function above a periodic surface.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Default minimum distance `||α_n| - κ|` from a Wood anomaly.
pub const DEFAULT_WOOD_EPS: f64 = 1e-3;

/// Default minimum vertical offset between field point and source line.
pub const DEFAULT_GREEN_GAP: f64 = 0.1;

const GREEN_TAIL_TOL: f64 = 1e-12;

/// Incident field `exp(iαx - iβy)` with `α = κ sinθ`, `β = κ cosθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub kappa: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn make_plane_wave(kappa: f64, theta: f64) -> Result<PlaneWave> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(alloc::format!(
            "wavenumber {kappa} must be positive"
        )));
    }
    if !(theta.abs() < FRAC_PI_2) {
        return Err(Error::invalid(alloc::format!(
            "incidence angle {theta} outside (-pi/2, pi/2)"
        )));
    }
    let (s, c) = theta.sin_cos();
    Ok(PlaneWave {
        kappa,
        theta,
        alpha: kappa * s,
        beta: kappa * c,
    })
}

pub fn incident_field(pw: &PlaneWave, x: f64, y: f64) -> Complex64 {
    Complex64::new(0.0, pw.alpha * x - pw.beta * y).exp()
}

/// `β` for a given horizontal wavenumber: `√(κ² - α²)` on the branch with
/// non-negative real and imaginary parts.
pub fn vertical_wavenumber(kappa: f64, alpha: f64) -> Complex64 {
    let d = (kappa - alpha.abs()) * (kappa + alpha.abs());
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// Rayleigh modes `n = -N..=N` for one incident wave.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    order: usize,
    alpha_n: Vec<f64>,
    beta_n: Vec<Complex64>,
    wave: PlaneWave,
    lambda_period: f64,
}

impl ModeSet {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        2 * self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha_n
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta_n
    }

    pub fn wave(&self) -> &PlaneWave {
        &self.wave
    }

    pub fn kappa(&self) -> f64 {
        self.wave.kappa
    }

    pub fn period(&self) -> f64 {
        self.lambda_period
    }

    /// Mode number of storage slot `i`.
    pub fn mode_number(&self, i: usize) -> i32 {
        i as i32 - self.order as i32
    }

    /// Storage slot of mode `n`.
    pub fn index(&self, n: i32) -> usize {
        (n + self.order as i32) as usize
    }

    pub fn is_propagating(&self, i: usize) -> bool {
        self.alpha_n[i].abs() < self.wave.kappa
    }

    pub fn propagating_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_propagating(i)).count()
    }
}

/// Fill `α_n = α + 2πn/Λ` and `β_n`, rejecting sets within `wood_eps` of a
/// Wood anomaly.
pub fn make_modes(
    pw: &PlaneWave,
    lambda_period: f64,
    order: usize,
    wood_eps: f64,
) -> Result<ModeSet> {
    if order < 1 {
        return Err(Error::invalid("mode order must be at least 1"));
    }
    if !(wood_eps > 0.0) {
        return Err(Error::invalid("wood_eps must be positive"));
    }
    if !(lambda_period > 0.0) {
        return Err(Error::invalid("period must be positive"));
    }
    let mut alpha_n = Vec::with_capacity(2 * order + 1);
    let mut beta_n = Vec::with_capacity(2 * order + 1);
    let mut worst: Option<(i32, f64)> = None;
    for i in 0..=2 * order {
        let n = i as i32 - order as i32;
        let a = pw.alpha + 2.0 * PI * n as f64 / lambda_period;
        let gap = (a.abs() - pw.kappa).abs();
        if gap <= wood_eps && worst.map_or(true, |(_, g)| gap < g) {
            worst = Some((n, gap));
        }
        alpha_n.push(a);
        beta_n.push(vertical_wavenumber(pw.kappa, a));
    }
    if let Some((n, gap)) = worst {
        return Err(Error::WoodAnomaly { n, gap });
    }
    Ok(ModeSet {
        order,
        alpha_n,
        beta_n,
        wave: *pw,
        lambda_period,
    })
}

/// Quasi-periodic Green's function
/// `(i/2Λ) Σ_n β_n⁻¹ exp(iα_n(x-s) + iβ_n|y-t|)`.
///
/// The series starts from the modes in `modes` and is extended up to `4N`
/// until the first omitted term is below 1e-12. Evaluation is restricted to
/// `|y - t| ≥ min_gap`.
pub fn green_quasiperiodic(
    modes: &ModeSet,
    x: f64,
    y: f64,
    s: f64,
    t: f64,
    min_gap: f64,
) -> Result<Complex64> {
    let dy = (y - t).abs();
    if dy < min_gap {
        return Err(Error::invalid(alloc::format!(
            "|y - t| = {dy} below minimum gap {min_gap}"
        )));
    }
    let dx = x - s;
    let kappa = modes.kappa();
    let alpha = modes.wave.alpha;
    let period = modes.lambda_period;
    let term = |n: i64| -> Complex64 {
        let a = alpha + 2.0 * PI * n as f64 / period;
        let b = vertical_wavenumber(kappa, a);
        (Complex64::new(0.0, a * dx) + Complex64::i() * b * dy).exp() / b
    };
    let base = modes.order as i64;
    let max_order = 4 * base;
    let mut order = base;
    let mut sum: Complex64 = (-order..=order).map(&term).sum();
    loop {
        let tail = term(order + 1).norm().max(term(-order - 1).norm());
        if tail < GREEN_TAIL_TOL {
            break;
        }
        if order >= max_order {
            return Err(Error::GreenTruncation(max_order as usize));
        }
        order += 1;
        sum += term(order) + term(-order);
    }
    Ok(Complex64::new(0.0, 1.0 / (2.0 * period)) * sum)
}
