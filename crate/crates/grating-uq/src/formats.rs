//! On-disk JSON and CSV artifacts.
//!
//! JSON floats use the shortest representation that round-trips exactly.
//! CSV files use `,` separators, a header row and 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use grating_uq_core::forward::Measurement;
use grating_uq_core::inverse::Reconstruction;
use grating_uq_core::surface::{Profile, ProfileCoeffs, SurfaceSample};
use grating_uq_core::uq::{paired_spectrum, EnsembleResult, Problem};
use grating_uq_core::{uniform_grid, Complex64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Grid used for the sampled heights stored alongside coefficients.
pub const PROFILE_GRID: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFile {
    pub kappa: f64,
    pub theta: f64,
    pub y0: f64,
    pub lambda_period: f64,
    pub tau: f64,
    pub grid: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_id: Option<usize>,
}

impl MeasurementFile {
    pub fn new(m: &Measurement, sample_id: Option<usize>) -> Self {
        Self {
            kappa: m.kappa,
            theta: m.theta,
            y0: m.y0,
            lambda_period: m.lambda_period,
            tau: m.tau,
            grid: m.grid(),
            re: m.values.iter().map(|v| v.re).collect(),
            im: m.values.iter().map(|v| v.im).collect(),
            sample_id,
        }
    }

    pub fn to_measurement(&self, path: &Path) -> Result<Measurement, CliError> {
        let n = self.re.len();
        if self.im.len() != n || self.grid.len() != n {
            return Err(CliError::format(path, "grid, re and im differ in length"));
        }
        Ok(Measurement {
            kappa: self.kappa,
            theta: self.theta,
            y0: self.y0,
            lambda_period: self.lambda_period,
            tau: self.tau,
            values: self
                .re
                .iter()
                .zip(&self.im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
        })
    }
}

/// One surface realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub sample_id: usize,
    pub seed: u64,
    pub lambda_period: f64,
    pub sigma: f64,
    pub l: f64,
    /// Combined Fourier coefficients of the realization.
    pub coeffs: Vec<f64>,
    pub xi0: f64,
    pub xi_sin: Vec<f64>,
    pub xi_cos: Vec<f64>,
    pub grid: Vec<f64>,
    pub heights: Vec<f64>,
}

impl SurfaceFile {
    pub fn new(sample_id: usize, seed: u64, sigma: f64, l: f64, s: &SurfaceSample) -> Self {
        let period = s.coeffs().period();
        let grid = uniform_grid(PROFILE_GRID, period);
        let heights = grid.iter().map(|&x| s.height(x)).collect();
        Self {
            sample_id,
            seed,
            lambda_period: period,
            sigma,
            l,
            coeffs: s.coeffs().coeffs().to_vec(),
            xi0: s.xi0(),
            xi_sin: s.xi_s().to_vec(),
            xi_cos: s.xi_c().to_vec(),
            grid,
            heights,
        }
    }

    pub fn profile(&self, path: &Path) -> Result<ProfileCoeffs, CliError> {
        ProfileCoeffs::new(self.coeffs.clone(), self.lambda_period)
            .map_err(|e| CliError::format(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub count: usize,
    pub master_seed: u64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRecord {
    pub kappa: f64,
    pub theta: f64,
    pub file: String,
    /// `(n, e_n)` for every propagating order.
    pub orders: Vec<(i32, f64)>,
    pub total: f64,
    pub residual_rms: f64,
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionFile {
    pub sample_id: Option<usize>,
    pub k_max: u32,
    pub lambda_period: f64,
    pub y0: f64,
    pub coeffs: Vec<f64>,
    /// `Σ_l J_l` history per stage.
    pub per_stage_objective: Vec<Vec<f64>>,
    pub per_stage_coeffs: Vec<Vec<f64>>,
    /// RMS deviation from `reference_coeffs` over 512 points.
    pub deviation_rms: f64,
    /// `truth` when a sample file was supplied, otherwise `deterministic`.
    pub deviation_reference: String,
    pub reference_coeffs: Vec<f64>,
}

impl ReconstructionFile {
    pub fn new(
        sample_id: Option<usize>,
        y0: f64,
        rec: &Reconstruction,
        reference: &ProfileCoeffs,
        reference_kind: &str,
    ) -> Self {
        Self {
            sample_id,
            k_max: rec.stages.last().map_or(0, |s| s.k),
            lambda_period: rec.coeffs.period(),
            y0,
            coeffs: rec.coeffs.coeffs().to_vec(),
            per_stage_objective: rec.stages.iter().map(|s| s.objective.clone()).collect(),
            per_stage_coeffs: rec
                .stages
                .iter()
                .map(|s| s.coeffs.coeffs().to_vec())
                .collect(),
            deviation_rms: grating_uq_core::inverse::deviation_rms(
                &rec.coeffs,
                reference,
                PROFILE_GRID,
            ),
            deviation_reference: reference_kind.into(),
            reference_coeffs: reference.coeffs().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub sigma: f64,
    pub l: f64,
    pub lambda_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: usize,
    pub y0: f64,
    pub coeffs: Vec<f64>,
    pub truth_coeffs: Vec<f64>,
    pub deviation_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct EnsembleFile {
    pub M: usize,
    pub failures: usize,
    pub master_seed: u64,
    pub spec: SpecRecord,
    pub k_max: u32,
    pub deterministic_coeffs: Vec<f64>,
    pub mean_coeffs: Vec<f64>,
    pub std_grid: Vec<f64>,
    /// Grid mean of `s_f`.
    pub std_mean: f64,
    pub dimension: usize,
    /// Row-major.
    pub covariance: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub paired_eigenvalues: Vec<f64>,
    pub sigma_rec: Option<f64>,
    pub l_rec: Option<f64>,
    /// RMS over the grid of `f̄ - f̃`.
    pub mean_deviation: f64,
    pub sample_deviation_mean: f64,
    pub sample_deviation_std: f64,
    pub samples: Vec<SampleRecord>,
}

impl EnsembleFile {
    pub fn new(problem: &Problem, master_seed: u64, r: &EnsembleResult) -> Self {
        let s = &r.summary;
        let grid = problem.stats_grid;
        Self {
            M: r.m,
            failures: r.failures,
            master_seed,
            spec: SpecRecord {
                sigma: problem.covariance.sigma(),
                l: problem.covariance.correlation_length(),
                lambda_period: problem.covariance.period(),
            },
            k_max: problem.inversion.k_max,
            deterministic_coeffs: problem.deterministic.coeffs().to_vec(),
            mean_coeffs: s.mean_coeffs.coeffs().to_vec(),
            std_grid: s.std_grid.clone(),
            std_mean: s.std_mean,
            dimension: s.covariance.dim(),
            covariance: s.covariance.row_major().to_vec(),
            eigenvalues: s.eigenvalues.clone(),
            paired_eigenvalues: paired_spectrum(&s.eigenvalues),
            sigma_rec: s.sigma_rec,
            l_rec: s.l_rec,
            mean_deviation: r.mean_deviation,
            sample_deviation_mean: r.sample_deviation.0,
            sample_deviation_std: r.sample_deviation.1,
            samples: r
                .per_sample
                .iter()
                .map(|o| SampleRecord {
                    sample_id: o.index,
                    y0: o.y0,
                    coeffs: o.reconstruction.coeffs.coeffs().to_vec(),
                    truth_coeffs: o.truth.coeffs().coeffs().to_vec(),
                    deviation_rms: grating_uq_core::inverse::deviation_rms(
                        &o.reconstruction.coeffs,
                        &o.truth,
                        grid,
                    ),
                })
                .collect(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

/// In-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Missing cells are left empty.
    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if let Some(v) = cell {
                    write!(out, "{v:.16e}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}
