//! Experiment configuration file.
//!
//! Every field has a default, so `{}` is a valid configuration describing the
//! first example surface with `σ = 1/15`, `l = 1`.

use std::f64::consts::PI;
use std::path::Path;

use grating_uq_core::inverse::{default_angles, LandweberConfig, Relaxation};
use grating_uq_core::presets;
use grating_uq_core::surface::{CovarianceSpec, ProfileCoeffs};
use grating_uq_core::uq::Problem;
use grating_uq_core::wavefield::DEFAULT_WOOD_EPS;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct ExperimentConfig {
    pub surface: SurfaceConfig,
    pub inversion: InversionConfig,
    pub data: DataConfig,
    pub mc: McConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    /// `example1` or `example2`; ignored when `coeffs` is given.
    pub preset: Option<String>,
    /// Explicit `[c0, a1, b1, a2, b2, ...]` for `c0 + Σ a_p cos(px') + b_p sin(px')`.
    pub coeffs: Option<Vec<f64>>,
    pub sigma: f64,
    pub l: f64,
    pub lambda_period: f64,
    /// KL truncation tolerance on `λ_{J+1}/λ_0`.
    pub basis_tol: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            preset: Some("example1".into()),
            coeffs: None,
            sigma: 1.0 / 15.0,
            l: 1.0,
            lambda_period: 2.0 * PI,
            basis_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InversionConfig {
    pub k_max: u32,
    pub angles: Vec<f64>,
    /// Mode truncation `N`.
    pub n: usize,
    pub gamma: f64,
    /// `η_k = eta0 / k²`.
    pub eta0: f64,
    /// Landweber iterations per stage.
    pub t: usize,
    pub quad_points: usize,
    pub wood_eps: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            k_max: 2,
            angles: default_angles(),
            n: 8,
            gamma: 1e-6,
            eta0: 0.0005,
            t: 1000,
            quad_points: 256,
            wood_eps: DEFAULT_WOOD_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// `y0 = ceil((max f + y0_standoff) * 10) / 10`.
    pub y0_standoff: f64,
    /// Measurement points per trace.
    pub q: usize,
    pub tau: f64,
    /// Rayleigh truncation of the data-generating forward solver.
    pub forward_order: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            y0_standoff: 0.5,
            q: 64,
            tau: 0.001,
            forward_order: grating_uq_core::forward::DEFAULT_FORWARD_ORDER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub m: usize,
    pub master_seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            m: 100,
            master_seed: 12345,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.covariance()?;
        self.deterministic()?;
        self.landweber().validate().map_err(config_error)?;
        let d = &self.data;
        if !(d.y0_standoff > 0.0) {
            return Err(CliError::Config("data.y0_standoff must be positive".into()));
        }
        if !(d.tau >= 0.0 && d.tau < 1.0) {
            return Err(CliError::Config("data.tau must lie in [0, 1)".into()));
        }
        if !d.q.is_power_of_two() || d.q < 4 * self.inversion.n + 4 {
            return Err(CliError::Config(format!(
                "data.q = {} must be a power of two >= 4N + 4",
                d.q
            )));
        }
        if d.forward_order < self.inversion.n {
            return Err(CliError::Config(
                "data.forward_order must be at least inversion.n".into(),
            ));
        }
        if !(self.surface.basis_tol > 0.0 && self.surface.basis_tol < 1.0) {
            return Err(CliError::Config(
                "surface.basis_tol must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn covariance(&self) -> Result<CovarianceSpec, CliError> {
        let s = &self.surface;
        CovarianceSpec::new(s.sigma, s.l, s.lambda_period).map_err(config_error)
    }

    /// The deterministic profile `f̃`, scaled to the configured period.
    pub fn deterministic(&self) -> Result<ProfileCoeffs, CliError> {
        let s = &self.surface;
        let coeffs = match (&s.coeffs, &s.preset) {
            (Some(c), _) => c.clone(),
            (None, Some(name)) => presets::by_name(name)
                .ok_or_else(|| CliError::Config(format!("unknown surface preset '{name}'")))?
                .into_coeffs(),
            (None, None) => {
                return Err(CliError::Config("surface needs a preset or coeffs".into()))
            }
        };
        ProfileCoeffs::new(coeffs, s.lambda_period).map_err(config_error)
    }

    pub fn landweber(&self) -> LandweberConfig {
        let i = &self.inversion;
        LandweberConfig {
            relaxation: Relaxation::InverseSquare(i.eta0),
            iterations: i.t,
            modes: i.n,
            quad_points: i.quad_points,
            k_max: i.k_max,
            angles: i.angles.clone(),
            gamma: i.gamma,
            wood_eps: i.wood_eps,
        }
    }

    pub fn problem(&self) -> Result<Problem, CliError> {
        let mut p = Problem::new(self.covariance()?, self.deterministic()?, self.landweber());
        p.basis_tol = self.surface.basis_tol;
        p.tau = self.data.tau;
        p.standoff = self.data.y0_standoff;
        p.measurement_points = self.data.q;
        p.forward_order = self.data.forward_order;
        Ok(p)
    }
}

fn config_error(e: grating_uq_core::Error) -> CliError {
    CliError::Config(e.to_string())
}
