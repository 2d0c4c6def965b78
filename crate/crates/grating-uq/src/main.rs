use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grating_uq::commands::{
    cmd_forward, cmd_invert, cmd_mccuq, cmd_plotdata, cmd_sample, PlotKind,
};
use grating_uq::ensemble::default_workers;
use grating_uq::{CliError, ExperimentConfig};

/// Random periodic surface scattering: sampling, forward solves, reconstruction
/// and Monte Carlo uncertainty quantification.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// JSON experiment configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides `mc.master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the ensemble (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write surface realizations.
    Sample {
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Synthesize measurements for every wavenumber and angle.
    Forward {
        /// Surface file from `sample`; the deterministic profile if omitted.
        #[arg(long)]
        sample: Option<PathBuf>,
    },
    /// Reconstruct a profile from a directory of measurements.
    Invert {
        #[arg(long)]
        measurements: PathBuf,
        /// Surface file to measure the deviation against.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run the Monte Carlo ensemble and recover the surface statistics.
    Mccuq {
        /// Sample count; overrides `mc.m`.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Export CSV for plotting: eigenvalues, profile, stages or objective.
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        kind: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.mc.master_seed);
    match cli.command {
        Command::Sample { count } => {
            let m = cmd_sample(&cfg, seed, count, &cli.out)?;
            println!("wrote {} surfaces to {}", m.count, cli.out.display());
        }
        Command::Forward { sample } => {
            let report = cmd_forward(&cfg, seed, sample.as_deref(), &cli.out)?;
            for r in &report {
                println!(
                    "k = {} theta = {:+.6}: efficiency sum {:.12}",
                    r.kappa, r.theta, r.total
                );
            }
        }
        Command::Invert {
            measurements,
            truth,
        } => {
            let r = cmd_invert(&cfg, &measurements, truth.as_deref(), &cli.out)?;
            println!(
                "k_max = {}, RMS deviation from {} profile {:.6e}",
                r.k_max, r.deviation_reference, r.deviation_rms
            );
        }
        Command::Mccuq { samples } => {
            if let Some(m) = samples {
                cfg.mc.m = m;
            }
            let workers = cli.workers.unwrap_or_else(default_workers);
            let e = cmd_mccuq(&cfg, seed, workers, &cli.out)?;
            println!(
                "M = {} (failed {}), mean deviation {:.6e}, mean s_f {:.6e}, l' = {}, sigma' = {}",
                e.M,
                e.failures,
                e.mean_deviation,
                e.std_mean,
                fmt_opt(e.l_rec),
                fmt_opt(e.sigma_rec)
            );
        }
        Command::Plotdata { input, kind } => {
            let kind: PlotKind = kind.parse()?;
            let path = cmd_plotdata(&input, kind, &cli.out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.6}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
