//! Per-sample reconstruction from multi-frequency near-field traces.
//!
//! For every wavenumber stage `k` and incidence angle `θ_l` the measured trace
//! is reduced to regularized Rayleigh amplitudes `ψ_n`. A trial profile `f_c`
//! is scored by the boundary mismatch
//!
//! ```text
//! J_l(c) = ‖ Σ_n ψ_n e^{iα_n x + iβ_n f_c(x)} + e^{iαx - iβ f_c(x)} ‖²_{L²(0,Λ)}
//! ```
//!
//! and driven towards `J = 0` by the Landweber update `c ← c - η_k DJᵀ J`.
//! Stages run at increasing integer wavenumbers, each adding one harmonic and
//! starting from the previous stage's profile.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::forward::Measurement;
use crate::surface::{Profile, ProfileCoeffs};
use crate::wavefield::{make_modes, make_plane_wave, ModeSet, DEFAULT_WOOD_EPS};
use crate::{uniform_grid, Error, Result};

/// Grid size of the RMS deviation metric.
pub const DEVIATION_GRID: usize = 512;

/// Angles matching a configured `θ_l` within this tolerance are accepted.
const ANGLE_MATCH_TOL: f64 = 1e-9;

/// `u_n = (1/Q) Σ_j u(x_j) e^{-iα_n x_j}` for `n = -N..=N`.
pub fn rayleigh_coefficients(m: &Measurement, modes: &ModeSet) -> Result<Vec<Complex64>> {
    let q = m.values.len();
    let needed = 4 * modes.order() + 4;
    if q < needed {
        return Err(Error::GridMismatch(alloc::format!(
            "trace has {q} points, extracting {} modes needs {needed}",
            modes.len()
        )));
    }
    let grid = m.grid();
    let inv_q = 1.0 / q as f64;
    Ok(modes
        .alpha()
        .iter()
        .map(|&a| {
            m.values
                .iter()
                .zip(&grid)
                .map(|(&u, &x)| u * Complex64::new(0.0, -a * x).exp())
                .sum::<Complex64>()
                * inv_q
        })
        .collect())
}

/// Regularized amplitudes referenced to `y = 0` for one (wavenumber, angle).
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub modes: ModeSet,
    pub psi: Vec<Complex64>,
    /// `true` where `ψ_n` went through the regularized (evanescent) branch.
    pub regularized: Vec<bool>,
    pub gamma: f64,
}

impl Trace {
    /// Build a trace from explicit amplitudes (no regularization applied).
    pub fn from_amplitudes(modes: ModeSet, psi: Vec<Complex64>) -> Result<Self> {
        if psi.len() != modes.len() {
            return Err(Error::invalid("amplitude count differs from mode count"));
        }
        let regularized = vec![false; psi.len()];
        Ok(Self {
            modes,
            psi,
            regularized,
            gamma: 0.0,
        })
    }
}

/// `ψ_n = u_n e^{-iβ_n y0}` for propagating modes and
/// `ψ_n = u_n e^{iβ_n y0} / (e^{2iβ_n y0} + γ)` for evanescent ones.
pub fn regularized_psi(u_n: &[Complex64], modes: &ModeSet, y0: f64, gamma: f64) -> Result<Trace> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("regularization parameter must be positive"));
    }
    if u_n.len() != modes.len() {
        return Err(Error::invalid("coefficient count differs from mode count"));
    }
    let mut psi = Vec::with_capacity(u_n.len());
    let mut regularized = Vec::with_capacity(u_n.len());
    for (i, (&u, &b)) in u_n.iter().zip(modes.beta()).enumerate() {
        let up = (Complex64::i() * b * y0).exp();
        if modes.is_propagating(i) {
            psi.push(u / up);
            regularized.push(false);
        } else {
            psi.push(u * up / (up * up + gamma));
            regularized.push(true);
        }
    }
    Ok(Trace {
        modes: modes.clone(),
        psi,
        regularized,
        gamma,
    })
}

/// Extract and regularize one measurement at its own `y0`.
pub fn trace_from_measurement(
    m: &Measurement,
    order: usize,
    gamma: f64,
    wood_eps: f64,
) -> Result<Trace> {
    let pw = make_plane_wave(m.kappa, m.theta)?;
    let modes = make_modes(&pw, m.lambda_period, order, wood_eps)?;
    let u = rayleigh_coefficients(m, &modes)?;
    regularized_psi(&u, &modes, m.y0, gamma)
}

/// Relaxation schedule `η_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relaxation {
    /// `η_k = eta0 / k²`.
    InverseSquare(f64),
    Constant(f64),
}

impl Relaxation {
    pub fn eta(&self, k: u32) -> f64 {
        match *self {
            Relaxation::InverseSquare(eta0) => eta0 / (k as f64 * k as f64),
            Relaxation::Constant(eta) => eta,
        }
    }

    fn base(&self) -> f64 {
        match *self {
            Relaxation::InverseSquare(v) | Relaxation::Constant(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandweberConfig {
    pub relaxation: Relaxation,
    /// Iterations `T` per continuation stage.
    pub iterations: usize,
    /// Mode truncation `N`.
    pub modes: usize,
    pub quad_points: usize,
    pub k_max: u32,
    pub angles: Vec<f64>,
    pub gamma: f64,
    pub wood_eps: f64,
}

/// Incidence angles avoiding Wood anomalies at integer wavenumbers for a 2π period.
pub fn default_angles() -> Vec<f64> {
    vec![-PI / 5.0, -PI / 10.0, PI / 24.0, PI / 10.0, PI / 5.0]
}

impl Default for LandweberConfig {
    fn default() -> Self {
        Self {
            relaxation: Relaxation::InverseSquare(0.0005),
            iterations: 1000,
            modes: 8,
            quad_points: 256,
            k_max: 2,
            angles: default_angles(),
            gamma: 1e-6,
            wood_eps: DEFAULT_WOOD_EPS,
        }
    }
}

impl LandweberConfig {
    pub fn validate(&self) -> Result<()> {
        let eta = self.relaxation.base();
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid("relaxation parameter must be positive"));
        }
        if self.iterations < 1 {
            return Err(Error::invalid("at least one Landweber iteration per stage"));
        }
        if self.modes < 1 {
            return Err(Error::invalid("mode truncation must be at least 1"));
        }
        if self.k_max < 1 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        if !self.quad_points.is_power_of_two() || self.quad_points < 4 * self.k_max as usize {
            return Err(Error::invalid(alloc::format!(
                "quadrature points {} must be a power of two >= 4 k_max",
                self.quad_points
            )));
        }
        if self.angles.is_empty() {
            return Err(Error::Empty("incidence angles"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::invalid("regularization parameter must be positive"));
        }
        if !(self.wood_eps > 0.0) {
            return Err(Error::invalid("wood_eps must be positive"));
        }
        Ok(())
    }
}

/// Precomputed tables for evaluating `J` and `DJ` on one stage.
struct StageKernel<'a> {
    traces: &'a [Trace],
    grid: Vec<f64>,
    h: f64,
    period: f64,
    /// Per trace: `ψ_n e^{iα_n x_q}`, row-major `q × modes`.
    lifted: Vec<Vec<Complex64>>,
    /// Per trace: `e^{iα x_q}`.
    incident: Vec<Vec<Complex64>>,
}

impl<'a> StageKernel<'a> {
    fn new(traces: &'a [Trace], quad_points: usize) -> Result<Self> {
        let first = traces.first().ok_or(Error::Empty("traces"))?;
        let period = first.modes.period();
        let grid = uniform_grid(quad_points, period);
        let mut lifted = Vec::with_capacity(traces.len());
        let mut incident = Vec::with_capacity(traces.len());
        for tr in traces {
            let mut table = Vec::with_capacity(quad_points * tr.psi.len());
            for &x in &grid {
                for (&p, &a) in tr.psi.iter().zip(tr.modes.alpha()) {
                    table.push(p * Complex64::new(0.0, a * x).exp());
                }
            }
            lifted.push(table);
            let alpha = tr.modes.wave().alpha;
            incident.push(
                grid.iter()
                    .map(|&x| Complex64::new(0.0, alpha * x).exp())
                    .collect(),
            );
        }
        Ok(Self {
            traces,
            h: period / quad_points as f64,
            grid,
            period,
            lifted,
            incident,
        })
    }

    /// `J_l(c)` for every trace, and `DJ` (rows per trace) when requested.
    fn evaluate(&self, c: &ProfileCoeffs, with_jacobian: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
        let heights: Vec<f64> = self.grid.iter().map(|&x| c.height(x)).collect();
        let np = c.coeffs().len();
        let basis: Vec<f64> = if with_jacobian {
            let mut b = Vec::with_capacity(self.grid.len() * np);
            for &x in &self.grid {
                for p in 0..np {
                    b.push(ProfileCoeffs::basis_function(p, x, self.period));
                }
            }
            b
        } else {
            Vec::new()
        };
        let mut values = Vec::with_capacity(self.traces.len());
        let mut rows = Vec::with_capacity(self.traces.len());
        for (t, tr) in self.traces.iter().enumerate() {
            let nm = tr.psi.len();
            let beta = tr.modes.wave().beta;
            let betas = tr.modes.beta();
            let mut j = 0.0;
            let mut row = vec![0.0; if with_jacobian { np } else { 0 }];
            for (q, &f) in heights.iter().enumerate() {
                let lifted = &self.lifted[t][q * nm..(q + 1) * nm];
                let mut field = Complex64::new(0.0, 0.0);
                let mut slope = Complex64::new(0.0, 0.0);
                for (&l, &b) in lifted.iter().zip(betas) {
                    let e = if b.im == 0.0 {
                        Complex64::new(0.0, b.re * f).exp()
                    } else {
                        Complex64::new((-b.im * f).exp(), 0.0)
                    };
                    let term = l * e;
                    field += term;
                    slope += Complex64::i() * b * term;
                }
                let ui = self.incident[t][q] * Complex64::new(0.0, -beta * f).exp();
                field += ui;
                j += field.norm_sqr();
                if with_jacobian {
                    slope -= Complex64::i() * beta * ui;
                    let w = 2.0 * (field.conj() * slope).re;
                    for (r, &bp) in row.iter_mut().zip(&basis[q * np..(q + 1) * np]) {
                        *r += w * bp;
                    }
                }
            }
            values.push(j * self.h);
            if with_jacobian {
                for r in &mut row {
                    *r *= self.h;
                }
                rows.push(row);
            }
        }
        (values, rows)
    }
}

/// `J_l(c)` by trapezoidal quadrature on `quad_points` uniform points.
pub fn objective(c: &ProfileCoeffs, trace: &Trace, quad_points: usize) -> Result<f64> {
    let kernel = StageKernel::new(core::slice::from_ref(trace), quad_points)?;
    Ok(kernel.evaluate(c, false).0[0])
}

/// `DJ[l][p] = ∂J_l/∂c_p` in closed form; one row per trace.
pub fn jacobian(c: &ProfileCoeffs, traces: &[Trace], quad_points: usize) -> Result<Vec<Vec<f64>>> {
    let kernel = StageKernel::new(traces, quad_points)?;
    Ok(kernel.evaluate(c, true).1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandweberOutcome {
    pub coeffs: ProfileCoeffs,
    /// `Σ_l J_l` before each update, followed by the final value.
    pub history: Vec<f64>,
}

/// `iterations` steps of `c ← c - η DJᵀ(c) J(c)`.
pub fn landweber_run(
    c0: &ProfileCoeffs,
    traces: &[Trace],
    eta: f64,
    iterations: usize,
    quad_points: usize,
) -> Result<LandweberOutcome> {
    let kernel = StageKernel::new(traces, quad_points)?;
    let mut c = c0.clone();
    let mut history = Vec::with_capacity(iterations + 1);
    let mut initial = None;
    for step in 0..=iterations {
        let want_jacobian = step < iterations;
        let (values, rows) = kernel.evaluate(&c, want_jacobian);
        let total: f64 = values.iter().sum();
        let start = *initial.get_or_insert(total);
        if !total.is_finite() || total > 10.0 * start {
            return Err(Error::Diverged {
                step,
                value: total,
                initial: start,
            });
        }
        history.push(total);
        if !want_jacobian {
            break;
        }
        let coeffs = c.coeffs_mut();
        for (j, row) in values.iter().zip(&rows) {
            for (cp, &d) in coeffs.iter_mut().zip(row) {
                *cp -= eta * d * j;
            }
        }
    }
    Ok(LandweberOutcome { coeffs: c, history })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub k: u32,
    pub coeffs: ProfileCoeffs,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub coeffs: ProfileCoeffs,
    pub stages: Vec<StageRecord>,
}

fn find_measurement(measurements: &[Measurement], k: u32, theta: f64) -> Result<&Measurement> {
    measurements
        .iter()
        .find(|m| (m.kappa - k as f64).abs() < 1e-9 && (m.theta - theta).abs() < ANGLE_MATCH_TOL)
        .ok_or(Error::MissingMeasurement { k, theta })
}

/// Frequency continuation over `k = 1..=k_max`, starting from the flat
/// profile at height `y0`.
pub fn continuation_reconstruct(
    measurements: &[Measurement],
    cfg: &LandweberConfig,
    y0: f64,
) -> Result<Reconstruction> {
    cfg.validate()?;
    let period = measurements
        .first()
        .map(|m| m.lambda_period)
        .ok_or(Error::Empty("measurements"))?;
    let mut c = ProfileCoeffs::constant(y0, period);
    let mut stages = Vec::with_capacity(cfg.k_max as usize);
    for k in 1..=cfg.k_max {
        let stage = |e: Error| Error::Stage {
            k,
            source: Box::new(e),
        };
        let traces = cfg
            .angles
            .iter()
            .map(|&theta| {
                let m = find_measurement(measurements, k, theta)?;
                trace_from_measurement(m, cfg.modes, cfg.gamma, cfg.wood_eps)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(stage)?;
        let start = c.resized(k as usize);
        let out = landweber_run(
            &start,
            &traces,
            cfg.relaxation.eta(k),
            cfg.iterations,
            cfg.quad_points,
        )
        .map_err(stage)?;
        c = out.coeffs;
        stages.push(StageRecord {
            k,
            coeffs: c.clone(),
            objective: out.history,
        });
    }
    Ok(Reconstruction { coeffs: c, stages })
}

/// RMS of `a - b` over a uniform grid of `n` points.
pub fn deviation_rms<A: Profile + ?Sized, B: Profile + ?Sized>(a: &A, b: &B, n: usize) -> f64 {
    let grid = uniform_grid(n, a.period());
    (grid
        .iter()
        .map(|&x| (a.height(x) - b.height(x)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
}
