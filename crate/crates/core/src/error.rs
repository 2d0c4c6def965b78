use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Wood anomaly at mode n = {n}: ||alpha_n| - kappa| = {gap:.3e}")]
    WoodAnomaly { n: i32, gap: f64 },

    #[error("collocation matrix ill-conditioned (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("Landweber iteration diverged at step {step}: objective {value:.3e} exceeds 10x initial {initial:.3e}")]
    Diverged {
        step: usize,
        value: f64,
        initial: f64,
    },

    #[error("eigenvalue order violated: lambda0 = {lambda0:.3e} <= lambda1 = {lambda1:.3e}")]
    OrderViolation { lambda0: f64, lambda1: f64 },

    #[error("surface sample rejected {0} times (profile not strictly positive)")]
    PositivityRejected(usize),

    #[error("covariance too rough: truncation order would exceed {0}")]
    BasisTooLarge(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("Green's function tail bound not reached with {0} modes")]
    GreenTruncation(usize),

    #[error("measurement line y0 = {y0} not above surface maximum {surface_max}")]
    MeasurementBelowSurface { y0: f64, surface_max: f64 },

    #[error("missing measurement for wavenumber k = {k}, angle theta = {theta}")]
    MissingMeasurement { k: u32, theta: f64 },

    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("stage k = {k}: {source}")]
    Stage { k: u32, source: Box<Error> },

    #[error("ensemble failed: {failed} of {total} samples failed")]
    EnsembleFailed { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of the numerical pipeline (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::WoodAnomaly { .. }
            | Error::IllConditioned(_)
            | Error::Diverged { .. }
            | Error::OrderViolation { .. }
            | Error::PositivityRejected(_)
            | Error::BasisTooLarge(_)
            | Error::GreenTruncation(_)
            | Error::EnsembleFailed { .. } => true,
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
