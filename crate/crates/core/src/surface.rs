//! Stationary Gaussian random periodic surfaces.
//!
//! A realization is `f(x) = f̃(x) + Σ_j √λ_j ξ_j φ_j(x)` where `f̃` is a
//! deterministic periodic profile and `φ_j` is the orthonormal trigonometric
//! eigenbasis of the squared-exponential covariance `σ² exp(-|x-y|²/l²)`
//! periodized over one period Λ.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{uniform_grid, Error, Result};

/// Largest truncation frequency accepted by [`build_basis`].
pub const MAX_KL_ORDER: usize = 64;

/// Minimum trapezoidal points for [`kl_eigenvalue_quadrature`].
pub const MIN_QUADRATURE_POINTS: usize = 256;

/// Grid used to check strict positivity of sampled surfaces.
pub const POSITIVITY_GRID: usize = 1024;

/// Redraws allowed before [`sample_surface`] gives up.
pub const MAX_REDRAWS: usize = 100;

/// Anything that can report a surface height.
pub trait Profile {
    fn height(&self, x: f64) -> f64;

    /// Period of the profile.
    fn period(&self) -> f64;

    fn sample_on(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&x| self.height(x)).collect()
    }
}

/// Parameters of the Gaussian covariance `c(τ) = σ² exp(-τ²/l²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSpec {
    sigma: f64,
    l: f64,
    lambda_period: f64,
}

impl CovarianceSpec {
    /// `sigma = 0` is accepted and describes a deterministic surface.
    pub fn new(sigma: f64, l: f64, lambda_period: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma must be finite and non-negative"));
        }
        if !(lambda_period > 0.0 && lambda_period.is_finite()) {
            return Err(Error::invalid("period must be positive"));
        }
        if !(l > 0.0 && l <= lambda_period / 4.0) {
            return Err(Error::invalid(alloc::format!(
                "correlation length {l} must lie in (0, period/4]"
            )));
        }
        Ok(Self {
            sigma,
            l,
            lambda_period,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn correlation_length(&self) -> f64 {
        self.l
    }

    pub fn period(&self) -> f64 {
        self.lambda_period
    }

    pub fn covariance(&self, tau: f64) -> f64 {
        let r = tau / self.l;
        self.sigma * self.sigma * (-r * r).exp()
    }

    /// Angular frequency `2πj/Λ` of the `j`-th eigenfunction pair.
    pub fn frequency(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.lambda_period
    }
}

/// `√π σ² l exp(-(2πj/Λ)² l² / 4)`: the Fourier transform of the covariance
/// at the `j`-th reciprocal lattice frequency.
pub fn kl_eigenvalue_closed_form(j: usize, spec: &CovarianceSpec) -> f64 {
    let w = spec.frequency(j) * spec.l;
    PI.sqrt() * spec.sigma * spec.sigma * spec.l * (-w * w / 4.0).exp()
}

/// Eigenvalue of the periodized covariance operator at frequency `j`, by
/// trapezoidal quadrature of `∫_0^Λ c_per(τ) cos(2πjτ/Λ) dτ`.
///
/// Summation in `f64` leaves an absolute error of order `1e-16 σ² Λ`, so
/// eigenvalues far down the spectrum are not resolved relative to their size.
pub fn kl_eigenvalue_quadrature(j: usize, spec: &CovarianceSpec, n_quad: usize) -> Result<f64> {
    if n_quad < MIN_QUADRATURE_POINTS {
        return Err(Error::invalid(alloc::format!(
            "quadrature needs at least {MIN_QUADRATURE_POINTS} points, got {n_quad}"
        )));
    }
    let period = spec.lambda_period;
    let h = period / n_quad as f64;
    let w = spec.frequency(j);
    let sum: f64 = (0..n_quad)
        .map(|i| {
            let tau = i as f64 * h;
            periodized_covariance(spec, tau) * (w * tau).cos()
        })
        .sum();
    Ok(sum * h)
}

/// `Σ_m c(τ + mΛ)`, truncated once both image terms drop below 1e-14.
fn periodized_covariance(spec: &CovarianceSpec, tau: f64) -> f64 {
    let mut total = spec.covariance(tau);
    let mut m = 1.0;
    loop {
        let right = spec.covariance(tau + m * spec.lambda_period);
        let left = spec.covariance(tau - m * spec.lambda_period);
        total += right + left;
        if right < 1e-14 && left < 1e-14 {
            break;
        }
        m += 1.0;
    }
    total
}

/// Truncated Karhunen-Loève basis.
///
/// Index 0 is the constant `√(1/Λ)`; frequency `j ≥ 1` contributes the pair
/// `√(2/Λ) sin(2πjx/Λ)`, `√(2/Λ) cos(2πjx/Λ)`, both with eigenvalue `λ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KlBasis {
    eigenvalues: Vec<f64>,
    lambda_period: f64,
}

impl KlBasis {
    pub fn new(eigenvalues: Vec<f64>, lambda_period: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Empty("KL eigenvalues"));
        }
        if eigenvalues.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::invalid("KL eigenvalues must be non-negative"));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("KL eigenvalues must be descending"));
        }
        Ok(Self {
            eigenvalues,
            lambda_period,
        })
    }

    /// Truncation frequency `J`.
    pub fn order(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    /// Number of basis functions, `2J + 1`.
    pub fn dimension(&self) -> usize {
        2 * self.order() + 1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn period(&self) -> f64 {
        self.lambda_period
    }

    /// Basis function `i` in the order (constant, sin_1, cos_1, ..., sin_J, cos_J).
    pub fn function(&self, i: usize, x: f64) -> f64 {
        let period = self.lambda_period;
        if i == 0 {
            return (1.0 / period).sqrt();
        }
        let j = i.div_ceil(2);
        let arg = 2.0 * PI * j as f64 * x / period;
        let amp = (2.0 / period).sqrt();
        if i % 2 == 1 {
            amp * arg.sin()
        } else {
            amp * arg.cos()
        }
    }
}

/// Smallest `J` with `λ_{J+1}/λ_0 < tol`, eigenvalues from the closed form.
pub fn build_basis(spec: &CovarianceSpec, tol: f64) -> Result<KlBasis> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid("tolerance must lie in (0, 1)"));
    }
    let lambda0 = kl_eigenvalue_closed_form(0, spec);
    let mut order = 0;
    if lambda0 > 0.0 {
        while kl_eigenvalue_closed_form(order + 1, spec) / lambda0 >= tol {
            order += 1;
            if order > MAX_KL_ORDER {
                return Err(Error::BasisTooLarge(MAX_KL_ORDER));
            }
        }
    }
    let eigenvalues = (0..=order)
        .map(|j| kl_eigenvalue_closed_form(j, spec))
        .collect();
    KlBasis::new(eigenvalues, spec.lambda_period)
}

/// Finite Fourier series `c_0 + Σ_p c_{2p-1} cos(ω_p x) + c_{2p} sin(ω_p x)`
/// with `ω_p = 2πp/Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCoeffs {
    coeffs: Vec<f64>,
    period: f64,
}

impl ProfileCoeffs {
    pub fn new(coeffs: Vec<f64>, period: f64) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::invalid(alloc::format!(
                "profile needs an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        if !(period > 0.0) {
            return Err(Error::invalid("period must be positive"));
        }
        Ok(Self { coeffs, period })
    }

    pub fn constant(value: f64, period: f64) -> Self {
        Self {
            coeffs: vec![value],
            period,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Highest harmonic `k` (length is `2k + 1`).
    pub fn harmonics(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    /// Zero-padded (or truncated) copy with `k` harmonics.
    pub fn resized(&self, k: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(2 * k + 1, 0.0);
        Self {
            coeffs,
            period: self.period,
        }
    }

    /// Basis function multiplying `c_p`: 1, cos(ω_1 x), sin(ω_1 x), ...
    pub fn basis_function(p: usize, x: f64, period: f64) -> f64 {
        if p == 0 {
            return 1.0;
        }
        let harmonic = p.div_ceil(2);
        let arg = 2.0 * PI * harmonic as f64 * x / period;
        if p % 2 == 1 {
            arg.cos()
        } else {
            arg.sin()
        }
    }
}

impl Profile for ProfileCoeffs {
    fn height(&self, x: f64) -> f64 {
        evaluate_profile(self, x)
    }

    fn period(&self) -> f64 {
        self.period
    }
}

pub fn evaluate_profile(coeffs: &ProfileCoeffs, x: f64) -> f64 {
    let c = &coeffs.coeffs;
    let w = 2.0 * PI * x / coeffs.period;
    let mut value = c[0];
    for p in 1..=coeffs.harmonics() {
        let (s, co) = (p as f64 * w).sin_cos();
        value += c[2 * p - 1] * co + c[2 * p] * s;
    }
    value
}

/// One surface realization: deterministic part plus a truncated KL draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    deterministic: ProfileCoeffs,
    xi0: f64,
    xi_s: Vec<f64>,
    xi_c: Vec<f64>,
    basis: KlBasis,
    combined: ProfileCoeffs,
}

impl SurfaceSample {
    /// Assemble a sample from explicit standard normal draws.
    pub fn from_draws(
        deterministic: ProfileCoeffs,
        basis: KlBasis,
        xi0: f64,
        xi_s: Vec<f64>,
        xi_c: Vec<f64>,
    ) -> Result<Self> {
        check_period(&deterministic, &basis)?;
        let order = basis.order();
        if xi_s.len() != order || xi_c.len() != order {
            return Err(Error::invalid(alloc::format!(
                "expected {order} sine and cosine draws"
            )));
        }
        let period = basis.period();
        let harmonics = order.max(deterministic.harmonics());
        let mut combined = deterministic.resized(harmonics);
        let lam = basis.eigenvalues();
        let c = combined.coeffs_mut();
        c[0] += lam[0].sqrt() * xi0 * (1.0 / period).sqrt();
        let amp = (2.0 / period).sqrt();
        for j in 1..=order {
            let s = lam[j].sqrt() * amp;
            c[2 * j - 1] += s * xi_c[j - 1];
            c[2 * j] += s * xi_s[j - 1];
        }
        Ok(Self {
            deterministic,
            xi0,
            xi_s,
            xi_c,
            basis,
            combined,
        })
    }

    pub fn deterministic(&self) -> &ProfileCoeffs {
        &self.deterministic
    }

    pub fn basis(&self) -> &KlBasis {
        &self.basis
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn xi_s(&self) -> &[f64] {
        &self.xi_s
    }

    pub fn xi_c(&self) -> &[f64] {
        &self.xi_c
    }

    /// The realization as a single Fourier coefficient vector.
    pub fn coeffs(&self) -> &ProfileCoeffs {
        &self.combined
    }

    /// `(min, max)` of the surface over a uniform grid of `n` points.
    pub fn extent(&self, n: usize) -> (f64, f64) {
        uniform_grid(n, self.period())
            .into_iter()
            .map(|x| self.height(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

impl Profile for SurfaceSample {
    fn height(&self, x: f64) -> f64 {
        evaluate_profile(&self.combined, x)
    }

    fn period(&self) -> f64 {
        self.basis.period()
    }
}

fn check_period(deterministic: &ProfileCoeffs, basis: &KlBasis) -> Result<()> {
    let (a, b) = (deterministic.period, basis.period());
    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
        return Err(Error::invalid(alloc::format!(
            "profile period {a} differs from basis period {b}"
        )));
    }
    Ok(())
}

/// Draw `2J + 1` standard normals and build the realization, redrawing while
/// the surface touches `y ≤ 0` on the positivity grid.
pub fn sample_surface<R: Rng + ?Sized>(
    deterministic: &ProfileCoeffs,
    basis: &KlBasis,
    rng: &mut R,
) -> Result<SurfaceSample> {
    check_period(deterministic, basis)?;
    let order = basis.order();
    for _ in 0..=MAX_REDRAWS {
        let xi0: f64 = rng.sample(StandardNormal);
        let mut xi_s = Vec::with_capacity(order);
        let mut xi_c = Vec::with_capacity(order);
        for _ in 0..order {
            xi_s.push(rng.sample(StandardNormal));
            xi_c.push(rng.sample(StandardNormal));
        }
        let sample =
            SurfaceSample::from_draws(deterministic.clone(), basis.clone(), xi0, xi_s, xi_c)?;
        if sample.extent(POSITIVITY_GRID).0 > 0.0 {
            return Ok(sample);
        }
    }
    Err(Error::PositivityRejected(MAX_REDRAWS))
}

/// Inner products `⟨f_m - f̄, φ_i⟩` for the ordered KL basis, by trapezoidal
/// quadrature on the uniform grid the two functions were sampled on.
pub fn project_onto_basis(
    sample_values: &[f64],
    mean_values: &[f64],
    basis: &KlBasis,
) -> Result<Vec<f64>> {
    let n = sample_values.len();
    if mean_values.len() != n {
        return Err(Error::GridMismatch(alloc::format!(
            "sample has {n} points, mean has {}",
            mean_values.len()
        )));
    }
    let needed = 8 * (basis.order() + 1);
    if n < needed {
        return Err(Error::GridMismatch(alloc::format!(
            "grid of {n} points too coarse, need at least {needed}"
        )));
    }
    let grid = uniform_grid(n, basis.period());
    let h = basis.period() / n as f64;
    let mut out = vec![0.0; basis.dimension()];
    for (q, &x) in grid.iter().enumerate() {
        let d = sample_values[q] - mean_values[q];
        if d == 0.0 {
            continue;
        }
        for (i, slot) in out.iter_mut().enumerate() {
            *slot += d * basis.function(i, x);
        }
    }
    for v in &mut out {
        *v *= h;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TWO_PI: f64 = 2.0 * PI;

    fn spec(sigma: f64, l: f64) -> CovarianceSpec {
        CovarianceSpec::new(sigma, l, TWO_PI).unwrap()
    }

    #[test]
    fn rejects_rough_or_degenerate_specs() {
        assert!(CovarianceSpec::new(0.2, 2.0, TWO_PI).is_err());
        assert!(CovarianceSpec::new(-0.1, 1.0, TWO_PI).is_err());
        assert!(CovarianceSpec::new(0.1, 0.0, TWO_PI).is_err());
        assert!(CovarianceSpec::new(0.1, 1.0, 0.0).is_err());
        assert!(CovarianceSpec::new(0.1, TWO_PI / 4.0, TWO_PI).is_ok());
    }

    #[test]
    fn closed_form_values() {
        let s = spec(0.2, 1.0);
        let l0 = kl_eigenvalue_closed_form(0, &s);
        assert_relative_eq!(l0, PI.sqrt() * 0.04, max_relative = 1e-15);
        assert_relative_eq!(l0, 0.070_898_154_036_220_6, max_relative = 1e-12);
        let ratio = kl_eigenvalue_closed_form(1, &s) / l0;
        assert_relative_eq!(ratio, (-0.25f64).exp(), max_relative = 1e-14);
        assert_eq!(kl_eigenvalue_closed_form(0, &spec(0.0, 1.0)), 0.0);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let s = spec(0.2, 1.0);
        let q = kl_eigenvalue_quadrature(0, &s, 1024).unwrap();
        let c = kl_eigenvalue_closed_form(0, &s);
        assert!((q - c).abs() / c < 1e-3);
        assert_eq!(
            kl_eigenvalue_quadrature(3, &spec(0.0, 1.0), 512).unwrap(),
            0.0
        );
        assert!(kl_eigenvalue_quadrature(0, &s, 255).is_err());
    }

    #[test]
    fn quadrature_converged_beyond_512() {
        let s = spec(0.2, 1.0);
        for j in [0, 1, 4] {
            let a = kl_eigenvalue_quadrature(j, &s, 512).unwrap();
            let b = kl_eigenvalue_quadrature(j, &s, 1024).unwrap();
            assert!((a - b).abs() / b.abs() < 1e-10, "j = {j}: {a} vs {b}");
        }
    }

    #[test]
    fn closed_form_and_quadrature_agree_over_parameter_grid() {
        for sigma in [1.0 / 15.0, 2.0 / 15.0, 0.2] {
            for l in [0.5, 1.0, 1.5] {
                let s = spec(sigma, l);
                for j in 0..=10 {
                    let c = kl_eigenvalue_closed_form(j, &s);
                    let q = kl_eigenvalue_quadrature(j, &s, 1024).unwrap();
                    let floor = 1e-15 * sigma * sigma * TWO_PI;
                    assert!(
                        (c - q).abs() <= 1e-3 * c + floor,
                        "sigma {sigma} l {l} j {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalues_strictly_descending() {
        let s = spec(0.1, 0.5);
        for j in 0..40 {
            assert!(kl_eigenvalue_closed_form(j, &s) > kl_eigenvalue_closed_form(j + 1, &s));
        }
    }

    #[test]
    fn basis_truncation_rule() {
        let s = spec(0.2, 1.0);
        let b = build_basis(&s, 1e-4).unwrap();
        assert_eq!(b.order(), 6);
        assert_eq!(b.dimension(), 13);
        assert_eq!(build_basis(&s, 0.5).unwrap().order(), 1);
        assert_eq!(build_basis(&s, 0.9).unwrap().order(), 0);
        assert!(build_basis(&s, 1.0).is_err());
        assert_eq!(build_basis(&spec(0.0, 1.0), 1e-4).unwrap().order(), 0);
        // l = 0.05 needs frequencies far beyond the cap
        let rough = spec(0.2, 0.05);
        assert_eq!(
            build_basis(&rough, 1e-4),
            Err(Error::BasisTooLarge(MAX_KL_ORDER))
        );
    }

    #[test]
    fn basis_is_orthonormal_under_trapezoid() {
        let b = build_basis(&spec(0.2, 0.5), 1e-4).unwrap();
        let n = 1024;
        let grid = uniform_grid(n, TWO_PI);
        let h = TWO_PI / n as f64;
        for i in 0..b.dimension() {
            for j in 0..b.dimension() {
                let g: f64 = grid
                    .iter()
                    .map(|&x| b.function(i, x) * b.function(j, x))
                    .sum::<f64>()
                    * h;
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-10, "({i},{j}) = {g}");
            }
        }
    }

    #[test]
    fn profile_evaluation() {
        let c = ProfileCoeffs::new(vec![1.5, 0.2, 0.0, 0.2, 0.0], TWO_PI).unwrap();
        assert_relative_eq!(evaluate_profile(&c, 0.0), 1.9, max_relative = 1e-15);
        let k = ProfileCoeffs::constant(0.7, TWO_PI);
        assert_eq!(evaluate_profile(&k, 2.3), 0.7);
        let s = ProfileCoeffs::new(vec![0.0, 0.0, 1.0], TWO_PI).unwrap();
        assert_relative_eq!(evaluate_profile(&s, PI / 2.0), 1.0, max_relative = 1e-15);
        assert!(ProfileCoeffs::new(vec![1.0, 2.0], TWO_PI).is_err());
    }

    #[test]
    fn zero_draw_reproduces_deterministic_profile() {
        let det = ProfileCoeffs::new(vec![1.5, 0.2, 0.0, 0.2, 0.0], TWO_PI).unwrap();
        let basis = build_basis(&spec(0.2, 1.0), 1e-4).unwrap();
        let j = basis.order();
        let s =
            SurfaceSample::from_draws(det.clone(), basis, 0.0, vec![0.0; j], vec![0.0; j]).unwrap();
        for x in uniform_grid(50, TWO_PI) {
            assert_relative_eq!(s.height(x), det.height(x), max_relative = 1e-15);
        }
    }

    #[test]
    fn combined_coefficients_match_kl_sum() {
        let det = ProfileCoeffs::new(vec![1.5, 0.2, 0.0, 0.2, 0.0], TWO_PI).unwrap();
        let basis = build_basis(&spec(0.2, 1.0), 1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_surface(&det, &basis, &mut rng).unwrap();
        let lam = basis.eigenvalues();
        for x in [0.0, 0.3, 2.0, 5.9] {
            let mut direct = det.height(x) + lam[0].sqrt() * s.xi0() * basis.function(0, x);
            for j in 1..=basis.order() {
                direct += lam[j].sqrt()
                    * (s.xi_s()[j - 1] * basis.function(2 * j - 1, x)
                        + s.xi_c()[j - 1] * basis.function(2 * j, x));
            }
            assert_relative_eq!(s.height(x), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn positivity_rejection_gives_up() {
        let det = ProfileCoeffs::constant(-1.0, TWO_PI);
        let basis = build_basis(&spec(0.01, 1.0), 1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_surface(&det, &basis, &mut rng),
            Err(Error::PositivityRejected(MAX_REDRAWS))
        );
    }

    #[test]
    fn sample_moments_match_model() {
        let det = ProfileCoeffs::new(vec![1.5, 0.2, 0.0, 0.2, 0.0], TWO_PI).unwrap();
        let s = spec(0.2, 1.0);
        let basis = build_basis(&s, 1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = uniform_grid(64, TWO_PI);
        let n = 10_000;
        let mut sum = vec![0.0; grid.len()];
        let mut sum2 = vec![0.0; grid.len()];
        for _ in 0..n {
            let sample = sample_surface(&det, &basis, &mut rng).unwrap();
            for (q, &x) in grid.iter().enumerate() {
                let d = sample.height(x) - det.height(x);
                sum[q] += d;
                sum2[q] += d * d;
            }
        }
        let nf = n as f64;
        let var: Vec<f64> = sum2.iter().map(|v| v / nf).collect();
        for (q, v) in var.iter().enumerate() {
            assert!((v - 0.04).abs() < 0.05 * 0.04, "variance {v} at {q}");
            let mean = sum[q] / nf;
            assert!(mean.abs() < 3.0 * (0.04 / nf).sqrt(), "mean {mean} at {q}");
        }
        let max = var.iter().cloned().fold(f64::MIN, f64::max);
        let min = var.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 1.1);
    }

    #[test]
    fn projection_picks_out_basis_functions() {
        let basis = build_basis(&spec(0.2, 1.0), 1e-4).unwrap();
        let grid = uniform_grid(256, TWO_PI);
        let zero = vec![0.0; 256];
        let p = project_onto_basis(&zero, &zero, &basis).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));

        let sin1: Vec<f64> = grid
            .iter()
            .map(|&x| (2.0 / TWO_PI).sqrt() * x.sin())
            .collect();
        let p = project_onto_basis(&sin1, &zero, &basis).unwrap();
        for (i, v) in p.iter().enumerate() {
            let expect = if i == 1 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-10);
        }
        let c = vec![(1.0 / TWO_PI).sqrt(); 256];
        let p = project_onto_basis(&c, &zero, &basis).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-10);
        assert!(p[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn projection_rejects_bad_grids() {
        let basis = build_basis(&spec(0.2, 1.0), 1e-4).unwrap();
        assert!(matches!(
            project_onto_basis(&[0.0; 64], &[0.0; 63], &basis),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            project_onto_basis(&[0.0; 40], &[0.0; 40], &basis),
            Err(Error::GridMismatch(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn profiles_are_periodic(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 0..6),
            x in -20.0f64..20.0,
        ) {
            let mut c = vec![0.5];
            c.extend(coeffs.iter().cloned());
            if c.len() % 2 == 0 { c.push(0.1); }
            let p = ProfileCoeffs::new(c, TWO_PI).unwrap();
            proptest::prop_assert!((p.height(x + TWO_PI) - p.height(x)).abs() < 1e-12);
        }
    }
}
