//! The five subcommands, as plain functions over paths.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use grating_uq_core::forward::{
    measurement_height, reflection_efficiencies, solve_forward, synthesize_measurement,
};
use grating_uq_core::inverse::continuation_reconstruct;
use grating_uq_core::surface::{
    kl_eigenvalue_closed_form, sample_surface, CovarianceSpec, Profile, ProfileCoeffs,
};
use grating_uq_core::uq::{sample_seed, splitmix64};
use grating_uq_core::wavefield::make_plane_wave;
use grating_uq_core::{uniform_grid, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::ensemble::run_parallel;
use crate::error::CliError;
use crate::formats::{
    read_json, write_json, Csv, EfficiencyRecord, EnsembleFile, Manifest, MeasurementFile,
    ReconstructionFile, SurfaceFile, PROFILE_GRID,
};

pub const MANIFEST: &str = "manifest.json";
pub const EFFICIENCIES: &str = "efficiencies.json";
pub const RECONSTRUCTION: &str = "reconstruction.json";
pub const ENSEMBLE: &str = "ensemble.json";

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn measurement_file_name(k: u32, angle_index: usize) -> String {
    format!("measurement_k{k:02}_a{angle_index:02}.json")
}

/// Write `count` surface realizations and a manifest listing them.
pub fn cmd_sample(
    cfg: &ExperimentConfig,
    seed: u64,
    count: usize,
    out: &Path,
) -> Result<Manifest, CliError> {
    ensure_dir(out)?;
    let problem = cfg.problem()?;
    let basis = problem.basis()?;
    let mut files = Vec::with_capacity(count);
    for i in 0..count {
        let s = sample_seed(seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sample = sample_surface(&problem.deterministic, &basis, &mut rng)?;
        let name = format!("surface_{i:04}.json");
        let record = SurfaceFile::new(i, s, cfg.surface.sigma, cfg.surface.l, &sample);
        write_json(&out.join(&name), &record)?;
        files.push(name);
    }
    let manifest = Manifest {
        count,
        master_seed: seed,
        files,
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Solve the forward problem for every `(k, θ_l)` and write noisy traces plus
/// an efficiency report. Without a sample file the deterministic profile is used.
pub fn cmd_forward(
    cfg: &ExperimentConfig,
    seed: u64,
    sample: Option<&Path>,
    out: &Path,
) -> Result<Vec<EfficiencyRecord>, CliError> {
    ensure_dir(out)?;
    let (surface, sample_id) = match sample {
        Some(path) => {
            let f: SurfaceFile = read_json(path)?;
            (f.profile(path)?, Some(f.sample_id))
        }
        None => (cfg.deterministic()?, None),
    };
    let surface_max = uniform_grid(grating_uq_core::surface::POSITIVITY_GRID, surface.period())
        .into_iter()
        .map(|x| surface.height(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let y0 = measurement_height(surface_max, cfg.data.y0_standoff);
    let mut rng =
        ChaCha8Rng::seed_from_u64(splitmix64(seed ^ sample_id.map_or(u64::MAX, |i| i as u64)));
    let order = cfg.data.forward_order;
    let mut report = Vec::new();
    for k in 1..=cfg.inversion.k_max {
        for (a, &theta) in cfg.inversion.angles.iter().enumerate() {
            let pw = make_plane_wave(k as f64, theta)?;
            let sol = solve_forward(
                &surface,
                &pw,
                order,
                4 * (2 * order + 1),
                cfg.inversion.wood_eps,
            )
            .map_err(|e| Error::Stage {
                k,
                source: Box::new(e),
            })?;
            let m = synthesize_measurement(
                &sol.coeffs,
                y0,
                surface_max,
                cfg.data.q,
                cfg.data.tau,
                &mut rng,
            )?;
            let name = measurement_file_name(k, a);
            write_json(&out.join(&name), &MeasurementFile::new(&m, sample_id))?;
            let eff = reflection_efficiencies(&sol.coeffs);
            let modes = &sol.coeffs.modes;
            let orders: Vec<(i32, f64)> = (0..modes.len())
                .filter(|&i| modes.is_propagating(i))
                .map(|i| (modes.mode_number(i), eff[i]))
                .collect();
            report.push(EfficiencyRecord {
                kappa: k as f64,
                theta,
                file: name,
                total: orders.iter().map(|o| o.1).sum(),
                orders,
                residual_rms: sol.residual_rms,
                condition_estimate: sol.condition_estimate,
            });
        }
    }
    write_json(&out.join(EFFICIENCIES), &report)?;
    Ok(report)
}

/// Reconstruct one profile from the measurement files in `dir`.
pub fn cmd_invert(
    cfg: &ExperimentConfig,
    dir: &Path,
    truth: Option<&Path>,
    out: &Path,
) -> Result<ReconstructionFile, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("measurement_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    let mut measurements = Vec::with_capacity(paths.len());
    let mut sample_id = None;
    for p in &paths {
        let f: MeasurementFile = read_json(p)?;
        sample_id = sample_id.or(f.sample_id);
        measurements.push(f.to_measurement(p)?);
    }
    let first = measurements.first().ok_or_else(|| {
        CliError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no measurement files"),
        )
    })?;
    let y0 = first.y0;
    if measurements.iter().any(|m| m.y0 != y0) {
        return Err(CliError::format(
            dir,
            "measurement heights differ between files",
        ));
    }
    let rec = continuation_reconstruct(&measurements, &cfg.landweber(), y0)?;
    let (reference, kind) = match truth {
        Some(path) => {
            let f: SurfaceFile = read_json(path)?;
            (f.profile(path)?, "truth")
        }
        None => (cfg.deterministic()?, "deterministic"),
    };
    let file = ReconstructionFile::new(sample_id, y0, &rec, &reference, kind);
    ensure_dir(out)?;
    write_json(&out.join(RECONSTRUCTION), &file)?;
    Ok(file)
}

/// Full Monte Carlo ensemble.
pub fn cmd_mccuq(
    cfg: &ExperimentConfig,
    seed: u64,
    workers: usize,
    out: &Path,
) -> Result<EnsembleFile, CliError> {
    let problem = cfg.problem()?;
    let result = run_parallel(&problem, cfg.mc.m, seed, workers)?;
    let file = EnsembleFile::new(&problem, seed, &result);
    ensure_dir(out)?;
    write_json(&out.join(ENSEMBLE), &file)?;
    Ok(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Empirical and closed-form covariance eigenvalues.
    Eigenvalues,
    /// Mean, standard deviation and deterministic profile on 512 points.
    Profile,
    /// Profile after each continuation stage next to the reference.
    Stages,
    /// Objective history per stage.
    Objective,
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "eigenvalues" => Ok(Self::Eigenvalues),
            "profile" => Ok(Self::Profile),
            "stages" => Ok(Self::Stages),
            "objective" => Ok(Self::Objective),
            other => Err(CliError::Usage(format!(
                "unknown plot kind '{other}' (expected eigenvalues, profile, stages or objective)"
            ))),
        }
    }
}

impl PlotKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Eigenvalues => "eigenvalues",
            Self::Profile => "profile",
            Self::Stages => "stages",
            Self::Objective => "objective",
        }
    }
}

/// Frequency of the `i`-th basis function in `(const, sin_1, cos_1, ...)` order.
fn frequency_of(i: usize) -> usize {
    i.div_ceil(2)
}

fn eigenvalue_csv(spec: &CovarianceSpec, empirical: Option<&[f64]>, rows: usize) -> Csv {
    let mut csv = Csv::new(&["index", "frequency", "empirical", "closed_form"]);
    for i in 0..rows {
        let j = frequency_of(i);
        csv.push(vec![
            Some(i as f64),
            Some(j as f64),
            empirical.and_then(|e| e.get(i).copied()),
            Some(kl_eigenvalue_closed_form(j, spec)),
        ]);
    }
    csv
}

fn profile_of(coeffs: &[f64], period: f64, input: &Path) -> Result<ProfileCoeffs, CliError> {
    ProfileCoeffs::new(coeffs.to_vec(), period).map_err(|e| CliError::format(input, e))
}

/// Export plot-ready CSV from an ensemble, reconstruction or configuration file.
pub fn cmd_plotdata(input: &Path, kind: PlotKind, out: &Path) -> Result<PathBuf, CliError> {
    let text = fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let csv = match kind {
        PlotKind::Eigenvalues => {
            if let Ok(e) = serde_json::from_str::<EnsembleFile>(&text) {
                let spec = CovarianceSpec::new(e.spec.sigma, e.spec.l, e.spec.lambda_period)?;
                eigenvalue_csv(&spec, Some(&e.eigenvalues), e.eigenvalues.len())
            } else {
                let cfg = ExperimentConfig::from_json(&text).map_err(|_| {
                    CliError::format(input, "expected an ensemble result or a configuration")
                })?;
                let basis = cfg.problem()?.basis()?;
                eigenvalue_csv(&cfg.covariance()?, None, basis.dimension())
            }
        }
        PlotKind::Profile => {
            let e: EnsembleFile =
                serde_json::from_str(&text).map_err(|err| CliError::format(input, err))?;
            let period = e.spec.lambda_period;
            let mean = profile_of(&e.mean_coeffs, period, input)?;
            let det = profile_of(&e.deterministic_coeffs, period, input)?;
            let grid = uniform_grid(e.std_grid.len(), period);
            let mut csv = Csv::new(&["x", "mean", "std", "deterministic"]);
            for (&x, &s) in grid.iter().zip(&e.std_grid) {
                csv.push(vec![
                    Some(x),
                    Some(mean.height(x)),
                    Some(s),
                    Some(det.height(x)),
                ]);
            }
            csv
        }
        PlotKind::Stages => {
            let r: ReconstructionFile =
                serde_json::from_str(&text).map_err(|err| CliError::format(input, err))?;
            let period = r.lambda_period;
            let stages = r
                .per_stage_coeffs
                .iter()
                .map(|c| profile_of(c, period, input))
                .collect::<Result<Vec<_>, _>>()?;
            let reference = profile_of(&r.reference_coeffs, period, input)?;
            let names: Vec<String> = (1..=stages.len()).map(|k| format!("stage_{k}")).collect();
            let mut header = vec!["x"];
            header.extend(names.iter().map(String::as_str));
            header.push("reference");
            let mut csv = Csv::new(&header);
            for x in uniform_grid(PROFILE_GRID, period) {
                let mut row = vec![Some(x)];
                row.extend(stages.iter().map(|s| Some(s.height(x))));
                row.push(Some(reference.height(x)));
                csv.push(row);
            }
            csv
        }
        PlotKind::Objective => {
            let r: ReconstructionFile =
                serde_json::from_str(&text).map_err(|err| CliError::format(input, err))?;
            let mut csv = Csv::new(&["k", "iteration", "objective"]);
            for (s, hist) in r.per_stage_objective.iter().enumerate() {
                for (it, &v) in hist.iter().enumerate() {
                    csv.push(vec![Some((s + 1) as f64), Some(it as f64), Some(v)]);
                }
            }
            csv
        }
    };
    ensure_dir(out)?;
    let path = out.join(format!("{}.csv", kind.name()));
    csv.write(&path)?;
    Ok(path)
}
