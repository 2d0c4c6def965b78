//! Parallel Monte Carlo driver.

use grating_uq_core::uq::{aggregate, run_sample, EnsembleResult, Problem};
use rayon::prelude::*;

use crate::error::CliError;

/// Worker count used when none is requested.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Run `m` samples on a pool of `workers` threads. Results are collected in
/// sample order, so the outcome does not depend on `workers`.
pub fn run_parallel(
    problem: &Problem,
    m: usize,
    master_seed: u64,
    workers: usize,
) -> Result<EnsembleResult, CliError> {
    if m < 2 {
        return Err(CliError::Config("mc.m must be at least 2".into()));
    }
    let basis = problem.basis()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let outcomes = pool.install(|| {
        (0..m)
            .into_par_iter()
            .map(|i| run_sample(problem, &basis, master_seed, i))
            .collect::<Vec<_>>()
    });
    Ok(aggregate(problem, &basis, outcomes)?)
}
