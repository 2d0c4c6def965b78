//! Monte Carlo ensemble over random surfaces and recovery of the covariance
//! parameters from the empirical spectrum.
//!
//! Each sample is a pure function of `(problem, master_seed, m)`, so the
//! ensemble can be mapped in any order or in parallel. Aggregation always
//! walks the samples by index.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::forward::{
    measurement_height, solve_forward, synthesize_measurement, Measurement,
    DEFAULT_COLLOCATION_FACTOR, DEFAULT_FORWARD_ORDER,
};
use crate::inverse::{
    continuation_reconstruct, deviation_rms, LandweberConfig, Reconstruction, DEVIATION_GRID,
};
use crate::linalg::{jacobi_eigen, SymMatrix};
use crate::surface::{
    build_basis, project_onto_basis, sample_surface, CovarianceSpec, KlBasis, Profile,
    ProfileCoeffs, SurfaceSample, POSITIVITY_GRID,
};
use crate::wavefield::make_plane_wave;
use crate::{uniform_grid, Error, Result};

/// Relative gap below which two neighbouring eigenvalues count as one pair.
pub const PAIR_TOLERANCE: f64 = 0.1;

/// Largest tolerated fraction of failed samples.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

/// Everything a single Monte Carlo sample needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub covariance: CovarianceSpec,
    /// KL truncation: smallest `J` with `λ_{J+1}/λ_0` below this.
    pub basis_tol: f64,
    pub deterministic: ProfileCoeffs,
    pub inversion: LandweberConfig,
    pub tau: f64,
    /// Measurement line sits this far above the sample maximum, rounded up.
    pub standoff: f64,
    pub measurement_points: usize,
    pub forward_order: usize,
    /// Uniform grid for `s_f`, projections and deviations.
    pub stats_grid: usize,
}

impl Problem {
    pub fn new(
        covariance: CovarianceSpec,
        deterministic: ProfileCoeffs,
        inversion: LandweberConfig,
    ) -> Self {
        Self {
            covariance,
            basis_tol: 1e-4,
            deterministic,
            inversion,
            tau: 0.001,
            standoff: 0.5,
            measurement_points: 64,
            forward_order: DEFAULT_FORWARD_ORDER,
            stats_grid: DEVIATION_GRID,
        }
    }

    pub fn basis(&self) -> Result<KlBasis> {
        build_basis(&self.covariance, self.basis_tol)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `m` under `master_seed`.
pub fn sample_seed(master_seed: u64, m: usize) -> u64 {
    splitmix64(splitmix64(master_seed) ^ (m as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub index: usize,
    pub truth: SurfaceSample,
    pub y0: f64,
    pub reconstruction: Reconstruction,
}

/// Synthesize noisy traces for every `(k, θ_l)` of the stage schedule.
pub fn synthesize_all<R: rand::Rng + ?Sized>(
    surface: &(impl Profile + ?Sized),
    surface_max: f64,
    problem: &Problem,
    y0: f64,
    rng: &mut R,
) -> Result<Vec<Measurement>> {
    let cfg = &problem.inversion;
    let order = problem.forward_order;
    let mut out = Vec::with_capacity(cfg.k_max as usize * cfg.angles.len());
    for k in 1..=cfg.k_max {
        for &theta in &cfg.angles {
            let pw = make_plane_wave(k as f64, theta)?;
            let sol = solve_forward(
                surface,
                &pw,
                order,
                DEFAULT_COLLOCATION_FACTOR * (2 * order + 1),
                cfg.wood_eps,
            )?;
            out.push(synthesize_measurement(
                &sol.coeffs,
                y0,
                surface_max,
                problem.measurement_points,
                problem.tau,
                rng,
            )?);
        }
    }
    Ok(out)
}

/// Sample a surface, synthesize its data and reconstruct it.
pub fn run_sample(
    problem: &Problem,
    basis: &KlBasis,
    master_seed: u64,
    m: usize,
) -> Result<SampleOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(master_seed, m));
    let truth = sample_surface(&problem.deterministic, basis, &mut rng)?;
    let surface_max = truth.extent(POSITIVITY_GRID).1;
    let y0 = measurement_height(surface_max, problem.standoff);
    let data = synthesize_all(&truth, surface_max, problem, y0, &mut rng)?;
    let reconstruction = continuation_reconstruct(&data, &problem.inversion, y0)?;
    Ok(SampleOutcome {
        index: m,
        truth,
        y0,
        reconstruction,
    })
}

fn check_same_shape(samples: &[ProfileCoeffs]) -> Result<()> {
    let first = samples.first().ok_or(Error::Empty("samples"))?;
    if samples
        .iter()
        .any(|s| s.coeffs().len() != first.coeffs().len())
    {
        return Err(Error::invalid("samples differ in coefficient count"));
    }
    Ok(())
}

/// Coefficient-wise arithmetic mean.
pub fn mean_profile(samples: &[ProfileCoeffs]) -> Result<ProfileCoeffs> {
    check_same_shape(samples)?;
    let first = &samples[0];
    let mut acc = vec![0.0; first.coeffs().len()];
    for s in samples {
        for (a, c) in acc.iter_mut().zip(s.coeffs()) {
            *a += c;
        }
    }
    let inv = 1.0 / samples.len() as f64;
    for a in &mut acc {
        *a *= inv;
    }
    ProfileCoeffs::new(acc, first.period())
}

/// `s_f(x) = sqrt((1/M) Σ (f_m(x) - f̄(x))²)` on `grid`.
pub fn std_profile(
    samples: &[ProfileCoeffs],
    mean: &ProfileCoeffs,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::invalid(
            "standard deviation needs at least two samples",
        ));
    }
    let fbar = mean.sample_on(grid);
    let mut acc = vec![0.0; grid.len()];
    for s in samples {
        for ((a, &x), &mu) in acc.iter_mut().zip(grid).zip(&fbar) {
            let d = s.height(x) - mu;
            *a += d * d;
        }
    }
    let inv = 1.0 / samples.len() as f64;
    Ok(acc.into_iter().map(|a| (a * inv).sqrt()).collect())
}

/// `C_ij = (1/M) Σ_m ⟨f_m - f̄, φ_i⟩⟨f_m - f̄, φ_j⟩`, symmetrized.
pub fn empirical_covariance(
    samples: &[ProfileCoeffs],
    mean: &ProfileCoeffs,
    basis: &KlBasis,
    grid: &[f64],
) -> Result<SymMatrix> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let fbar = mean.sample_on(grid);
    let d = basis.dimension();
    let mut acc = vec![0.0; d * d];
    for s in samples {
        let v = project_onto_basis(&s.sample_on(grid), &fbar, basis)?;
        for i in 0..d {
            for j in 0..d {
                acc[i * d + j] += v[i] * v[j];
            }
        }
    }
    let inv = 1.0 / samples.len() as f64;
    let mut c = SymMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            c.set(i, j, 0.5 * (acc[i * d + j] + acc[j * d + i]) * inv);
        }
    }
    Ok(c)
}

/// All eigenvalues of `c`, descending.
pub fn symmetric_eigenvalues(c: &SymMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_eigen(c)?.values)
}

/// `l' = sqrt(4 ln(λ0/λ1))`, `σ' = sqrt(λ0 / (√π l'))`.
pub fn recover_statistics(lambda0: f64, lambda1: f64) -> Result<(f64, f64)> {
    if !(lambda1 > 0.0 && lambda0 > lambda1) {
        return Err(Error::OrderViolation { lambda0, lambda1 });
    }
    let l = (4.0 * (lambda0 / lambda1).ln()).sqrt();
    let sigma = (lambda0 / (PI.sqrt() * l)).sqrt();
    Ok((l, sigma))
}

/// Recovery from the eigenvalues at frequencies `i < j` for period `Λ`.
pub fn recover_statistics_general(
    i: usize,
    lambda_i: f64,
    j: usize,
    lambda_j: f64,
    period: f64,
) -> Result<(f64, f64)> {
    if i >= j {
        return Err(Error::invalid("frequencies must satisfy i < j"));
    }
    if !(lambda_j > 0.0 && lambda_i > lambda_j) {
        return Err(Error::OrderViolation {
            lambda0: lambda_i,
            lambda1: lambda_j,
        });
    }
    let wi = 2.0 * PI * i as f64 / period;
    let wj = 2.0 * PI * j as f64 / period;
    let l = (4.0 * (lambda_i / lambda_j).ln() / (wj * wj - wi * wi)).sqrt();
    let sigma = (lambda_i * (wi * wi * l * l / 4.0).exp() / (PI.sqrt() * l)).sqrt();
    Ok((l, sigma))
}

/// Collapse a descending spectrum into one value per frequency: the first
/// eigenvalue stands alone, later neighbours within [`PAIR_TOLERANCE`] are
/// averaged.
pub fn paired_spectrum(eigenvalues: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(eigenvalues.len() / 2 + 1);
    let Some((&first, rest)) = eigenvalues.split_first() else {
        return out;
    };
    out.push(first);
    let mut i = 0;
    while i < rest.len() {
        let a = rest[i];
        match rest.get(i + 1) {
            Some(&b) if (a - b).abs() < PAIR_TOLERANCE * a.abs() => {
                out.push(0.5 * (a + b));
                i += 2;
            }
            _ => {
                out.push(a);
                i += 1;
            }
        }
    }
    out
}

/// `(λ_0, λ_1)` for the recovery formula.
pub fn leading_pair(eigenvalues: &[f64]) -> Result<(f64, f64)> {
    let p = paired_spectrum(eigenvalues);
    if p.len() < 2 {
        return Err(Error::Empty("spectrum with two distinct levels"));
    }
    Ok((p[0], p[1]))
}

/// Ensemble statistics of a set of profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean_coeffs: ProfileCoeffs,
    pub std_grid: Vec<f64>,
    /// Grid mean of `s_f`.
    pub std_mean: f64,
    pub covariance: SymMatrix,
    pub eigenvalues: Vec<f64>,
    pub sigma_rec: Option<f64>,
    pub l_rec: Option<f64>,
}

/// Mean, standard deviation, covariance spectrum and recovered parameters.
/// Profiles are zero-padded to a common harmonic count first.
pub fn summarize(
    samples: &[ProfileCoeffs],
    basis: &KlBasis,
    grid_points: usize,
) -> Result<Summary> {
    let harmonics = samples
        .iter()
        .map(|s| s.harmonics())
        .max()
        .ok_or(Error::Empty("samples"))?;
    let padded: Vec<ProfileCoeffs> = samples.iter().map(|s| s.resized(harmonics)).collect();
    let grid = uniform_grid(grid_points, basis.period());
    let mean_coeffs = mean_profile(&padded)?;
    let std_grid = std_profile(&padded, &mean_coeffs, &grid)?;
    let std_mean = std_grid.iter().sum::<f64>() / grid_points as f64;
    let covariance = empirical_covariance(&padded, &mean_coeffs, basis, &grid)?;
    let eigenvalues = symmetric_eigenvalues(&covariance)?;
    let recovered = leading_pair(&eigenvalues)
        .and_then(|(a, b)| recover_statistics_general(0, a, 1, b, basis.period()))
        .ok();
    Ok(Summary {
        mean_coeffs,
        std_grid,
        std_mean,
        covariance,
        eigenvalues,
        sigma_rec: recovered.map(|r| r.1),
        l_rec: recovered.map(|r| r.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub m: usize,
    pub failures: usize,
    pub summary: Summary,
    /// `ē`: RMS over the grid of `f̄ - f̃`.
    pub mean_deviation: f64,
    /// Mean and population standard deviation over samples of RMS(`f_m` - truth).
    pub sample_deviation: (f64, f64),
    pub per_sample: Vec<SampleOutcome>,
}

/// Combine per-sample outcomes (in index order) into ensemble statistics.
pub fn aggregate(
    problem: &Problem,
    basis: &KlBasis,
    outcomes: Vec<Result<SampleOutcome>>,
) -> Result<EnsembleResult> {
    let total = outcomes.len();
    let per_sample: Vec<SampleOutcome> = outcomes.into_iter().filter_map(|r| r.ok()).collect();
    let failures = total - per_sample.len();
    if failures as f64 > MAX_FAILURE_FRACTION * total as f64 || per_sample.len() < 2 {
        return Err(Error::EnsembleFailed {
            failed: failures,
            total,
        });
    }
    let recon: Vec<ProfileCoeffs> = per_sample
        .iter()
        .map(|s| s.reconstruction.coeffs.clone())
        .collect();
    let summary = summarize(&recon, basis, problem.stats_grid)?;
    let mean_deviation = deviation_rms(
        &summary.mean_coeffs,
        &problem.deterministic,
        problem.stats_grid,
    );
    let devs: Vec<f64> = per_sample
        .iter()
        .map(|s| deviation_rms(&s.reconstruction.coeffs, &s.truth, problem.stats_grid))
        .collect();
    let n = devs.len() as f64;
    let dmean = devs.iter().sum::<f64>() / n;
    let dstd = (devs.iter().map(|d| (d - dmean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(EnsembleResult {
        m: total,
        failures,
        summary,
        mean_deviation,
        sample_deviation: (dmean, dstd),
        per_sample,
    })
}

/// Sequential ensemble of `m` samples.
pub fn run_ensemble(problem: &Problem, m: usize, master_seed: u64) -> Result<EnsembleResult> {
    if m < 2 {
        return Err(Error::invalid("ensemble needs at least two samples"));
    }
    let basis = problem.basis()?;
    let outcomes = (0..m)
        .map(|i| run_sample(problem, &basis, master_seed, i))
        .collect();
    aggregate(problem, &basis, outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::surface::{kl_eigenvalue_closed_form, SurfaceSample};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    const TWO_PI: f64 = 2.0 * PI;

    fn spec(sigma: f64, l: f64) -> CovarianceSpec {
        CovarianceSpec::new(sigma, l, TWO_PI).unwrap()
    }

    fn pc(c: &[f64]) -> ProfileCoeffs {
        ProfileCoeffs::new(c.to_vec(), TWO_PI).unwrap()
    }

    #[test]
    fn seeds_differ_per_sample_and_master() {
        let a: Vec<u64> = (0..100).map(|m| sample_seed(7, m)).collect();
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_ne!(sample_seed(7, 0), sample_seed(8, 0));
        assert_eq!(sample_seed(7, 3), sample_seed(7, 3));
    }

    #[test]
    fn mean_examples() {
        let c = pc(&[1.0, 0.2, -0.3]);
        assert_eq!(mean_profile(core::slice::from_ref(&c)).unwrap(), c);
        let neg = pc(&[-1.0, -0.2, 0.3]);
        assert!(mean_profile(&[c.clone(), neg])
            .unwrap()
            .coeffs()
            .iter()
            .all(|&v| v == 0.0));
        assert!(mean_profile(&[]).is_err());
        assert!(mean_profile(&[c, pc(&[1.0])]).is_err());
    }

    #[test]
    fn mean_commutes_with_evaluation() {
        let s = [
            pc(&[1.0, 0.2, -0.3, 0.1, 0.0]),
            pc(&[1.4, -0.1, 0.3, 0.0, 0.2]),
            pc(&[0.9, 0.0, 0.0, 0.5, -0.5]),
        ];
        let mean = mean_profile(&s).unwrap();
        for x in uniform_grid(37, TWO_PI) {
            let direct = s.iter().map(|p| p.height(x)).sum::<f64>() / 3.0;
            assert!((mean.height(x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn std_examples() {
        let grid = uniform_grid(64, TWO_PI);
        let c = pc(&[1.0, 0.2, -0.3]);
        let same = [c.clone(), c.clone()];
        let m = mean_profile(&same).unwrap();
        assert!(std_profile(&same, &m, &grid)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let d = 0.03;
        let pair = [pc(&[1.0 + d, 0.2, -0.3]), pc(&[1.0 - d, 0.2, -0.3])];
        let m = mean_profile(&pair).unwrap();
        for v in std_profile(&pair, &m, &grid).unwrap() {
            assert!((v - d).abs() < 1e-14);
        }
        assert!(std_profile(&pair[..1], &m, &grid).is_err());
    }

    #[test]
    fn identical_samples_have_zero_covariance() {
        let basis = build_basis(&spec(0.2, 1.0), 1e-4).unwrap();
        let c = presets::example1();
        let s = [c.clone(), c.clone(), c];
        let mean = mean_profile(&s).unwrap();
        let cov = empirical_covariance(&s, &mean, &basis, &uniform_grid(512, TWO_PI)).unwrap();
        assert!(cov.row_major().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn recovery_of_a_known_pair() {
        let l0 = PI.sqrt() * 0.04;
        let (l, s) = recover_statistics(l0, l0 * (-0.25f64).exp()).unwrap();
        assert!((l - 1.0).abs() < 1e-14 && (s - 0.2).abs() < 1e-14);
        assert!(matches!(
            recover_statistics(1.0, 1.0),
            Err(Error::OrderViolation { .. })
        ));
        assert!(recover_statistics(1.0, 0.0).is_err());
    }

    #[test]
    fn general_recovery_uses_any_two_frequencies() {
        let sp = CovarianceSpec::new(0.13, 0.9, 5.0).unwrap();
        let lam: Vec<f64> = (0..5).map(|j| kl_eigenvalue_closed_form(j, &sp)).collect();
        for (i, j) in [(0, 1), (1, 3), (2, 4)] {
            let (l, s) = recover_statistics_general(i, lam[i], j, lam[j], 5.0).unwrap();
            assert!(
                (l - 0.9).abs() < 1e-10 && (s - 0.13).abs() < 1e-10,
                "{i},{j}"
            );
        }
        assert!(recover_statistics_general(2, 1.0, 1, 0.5, 5.0).is_err());
    }

    #[test]
    fn pairing_rule() {
        assert_eq!(
            paired_spectrum(&[5.0, 3.0, 2.9, 1.0, 0.95, 0.1]),
            vec![5.0, 2.95, 0.975, 0.1]
        );
        assert_eq!(paired_spectrum(&[5.0, 3.0, 2.0]), vec![5.0, 3.0, 2.0]);
        assert_eq!(leading_pair(&[4.0, 3.1, 2.9]).unwrap(), (4.0, 3.0));
        assert!(leading_pair(&[1.0]).is_err());
    }

    fn stub_ensemble(sp: &CovarianceSpec, m: usize, seed: u64) -> (KlBasis, Vec<ProfileCoeffs>) {
        let basis = build_basis(sp, 1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let det = ProfileCoeffs::constant(0.0, TWO_PI);
        let samples = (0..m)
            .map(|_| {
                let j = basis.order();
                let xi0 = rng.sample(StandardNormal);
                let xs = (0..j).map(|_| rng.sample(StandardNormal)).collect();
                let xc = (0..j).map(|_| rng.sample(StandardNormal)).collect();
                SurfaceSample::from_draws(det.clone(), basis.clone(), xi0, xs, xc)
                    .unwrap()
                    .coeffs()
                    .clone()
            })
            .collect();
        (basis, samples)
    }

    #[test]
    fn stubbed_pipeline_recovers_truth() {
        let sp = spec(0.2, 1.0);
        let (basis, samples) = stub_ensemble(&sp, 4000, 11);
        let s = summarize(&samples, &basis, 512).unwrap();
        assert!((s.l_rec.unwrap() - 1.0).abs() < 0.08, "{:?}", s.l_rec);
        assert!(
            (s.sigma_rec.unwrap() - 0.2).abs() < 0.2 * 0.08,
            "{:?}",
            s.sigma_rec
        );
        let paired = paired_spectrum(&s.eigenvalues);
        for j in 0..=3 {
            let exact = kl_eigenvalue_closed_form(j, &sp);
            assert!(
                (paired[j] - exact).abs() < 0.15 * exact,
                "j {j}: {} vs {exact}",
                paired[j]
            );
        }
        let tr: f64 = (0..basis.dimension()).map(|i| s.covariance.get(i, i)).sum();
        let ms: f64 = s.std_grid.iter().map(|v| v * v).sum::<f64>() / 512.0;
        assert!((tr - ms * TWO_PI).abs() < 0.05 * tr);
        assert!(s.covariance.asymmetry() < 1e-12);
        assert!(*s.eigenvalues.last().unwrap() >= -1e-10 * s.eigenvalues[0]);
    }

    #[test]
    fn ensemble_needs_two_samples() {
        let p = Problem::new(
            spec(0.0, 1.0),
            presets::example1(),
            LandweberConfig::default(),
        );
        assert!(run_ensemble(&p, 1, 0).is_err());
    }

    #[test]
    fn failure_policy() {
        let sp = spec(0.0, 1.0);
        let p = Problem::new(sp, presets::example1(), LandweberConfig::default());
        let basis = p.basis().unwrap();
        let r = aggregate(&p, &basis, vec![Err(Error::IllConditioned(1e13)); 3]);
        assert_eq!(
            r.unwrap_err(),
            Error::EnsembleFailed {
                failed: 3,
                total: 3
            }
        );
    }

    #[test]
    fn zero_spread_ensemble() {
        let cfg = LandweberConfig {
            k_max: 1,
            iterations: 20,
            ..Default::default()
        };
        let mut p = Problem::new(spec(0.0, 1.0), presets::example1(), cfg);
        p.tau = 0.0;
        let basis = p.basis().unwrap();
        let a = run_sample(&p, &basis, 3, 0).unwrap();
        let mut b = a.clone();
        b.index = 1;
        let r = aggregate(&p, &basis, vec![Ok(a), Ok(b)]).unwrap();
        assert!(r.summary.std_grid.iter().all(|&v| v == 0.0));
        assert!(r.summary.covariance.row_major().iter().all(|&v| v == 0.0));
        assert_eq!(r.summary.l_rec, None);
    }

    proptest! {
        #[test]
        fn recovery_inverts_the_closed_form(sigma in 0.01f64..1.0, l in 0.05f64..1.5) {
            let sp = spec(sigma, l);
            let (lr, sr) = recover_statistics(kl_eigenvalue_closed_form(0, &sp), kl_eigenvalue_closed_form(1, &sp)).unwrap();
            prop_assert!((lr - l).abs() < 1e-12 * l.max(1.0));
            prop_assert!((sr - sigma).abs() < 1e-12);
        }

        #[test]
        fn eigenvalues_descend_and_are_nonnegative(seed in 0u64..1000) {
            let (basis, samples) = stub_ensemble(&spec(0.1, 1.0), 20, seed);
            let s = summarize(&samples, &basis, 256).unwrap();
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(*s.eigenvalues.last().unwrap() >= -1e-10 * s.eigenvalues[0]);
        }
    }
}
