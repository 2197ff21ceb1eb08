use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "autoconv", version, about = "Autoconvolution sup bounds: certificates, search and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check coefficient files (default: the bundled ones) against the expectations manifest.
    Verify {
        /// Coefficient files or bundled asset names.
        paths: Vec<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Run the Fourier lower-bound certificate.
    Bound {
        #[arg(long, default_value_t = 0.138)]
        delta: f64,
        /// Cosine coefficients a_1..a_N of G (default: the bundled delta = 0.138 list).
        #[arg(long)]
        g_file: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Minimize the kernel quadratic form over nonnegative step functions.
    Qpbound {
        #[arg(long, default_value_t = 0.14)]
        delta: f64,
        /// Cells on [-1/4, 1/4].
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[command(flatten)]
        out: Output,
    },
    /// LP-and-mix search for step functions with small sup(f*f).
    Improve {
        /// Start from this coefficient file instead of random starts.
        input: Option<String>,
        #[arg(long, default_value_t = 208)]
        n: usize,
        #[arg(long, default_value_t = 2025)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = autoconv_core::search::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = autoconv_core::search::DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Allow negative coefficients (coordinate descent only); needs an input file.
        #[arg(long)]
        signed: bool,
        /// Trace of the best run as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Autoconvolution of a power-law piece set: `f0`, `counterexample` or a file of `lo hi c d e` rows.
    Analytic {
        which: String,
        #[arg(long, default_value_t = autoconv_core::analytic::DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = autoconv_core::analytic::DEFAULT_TOL)]
        tol: f64,
        /// (x, f*f(x)) on the scan grid.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Node values of f*f over [-1/2, 1/2] as CSV (stdout without --csv).
    Convolve {
        path: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.25) {
        bail!("--delta must lie in (0, 1/4], got {delta}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { paths, out } => commands::verify(&paths, &out),
        Command::Bound { delta, g_file, out } => {
            check_delta(delta)?;
            commands::bound(delta, g_file.as_deref(), &out)
        }
        Command::Qpbound { delta, grid, out } => {
            check_delta(delta)?;
            commands::qpbound(delta, grid, &out)
        }
        Command::Improve {
            input,
            n,
            seed,
            restarts,
            tol,
            max_iter,
            signed,
            csv,
            out,
        } => {
            if n == 0 || restarts == 0 {
                bail!("--n and --restarts must be at least 1");
            }
            if !(tol > 0.0) {
                bail!("--tol must be positive");
            }
            let opts = autoconv_core::search::SearchOptions {
                tol,
                max_iter,
                ..Default::default()
            };
            let start = commands::Start { input, n, seed, restarts, signed };
            commands::improve(&start, &opts, csv.as_deref(), &out)
        }
        Command::Analytic { which, grid, tol, csv, out } => {
            if grid == 0 || !(tol > 0.0) {
                bail!("--grid must be at least 1 and --tol positive");
            }
            commands::analytic(&which, grid, tol, csv.as_deref(), &out)
        }
        Command::Convolve { path, csv, out } => commands::convolve(&path, csv.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
