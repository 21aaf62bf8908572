use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ecc_core::bench::{run_benchmark, BenchConfig};
use ecc_core::gradcheck::gradcheck;
use ecc_core::io::{read_thresholds, write_coefficients, write_curve};
use ecc_core::soft::{effective_field, soft_coefficients};
use ecc_core::synth::parse_dims;
use ecc_core::{
    compute_coefficients, compute_ecc, generate_grid, oracle_ecc, read_grid,
    reparametrize_direction, soft_ecc, uniform_thresholds, write_grid, AccumulationStrategy,
    EccError, ScalarGrid, SoftEccParams, SyntheticKind, SyntheticSpec, ThresholdSet,
};

/// Gradient-check tolerance on the maximum relative error.
const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "ecc", version, about = "Euler characteristic curves of 2D and 3D grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic grid.
    Generate {
        #[arg(long, default_value = "uniform-random")]
        kind: SyntheticKind,
        #[arg(long)]
        dims: DimsArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exact curve by coefficient histogram.
    Compute {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long, default_value = "fullsweep")]
        strategy: AccumulationStrategy,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        output: PathBuf,
        /// JSON file receiving the wall time of the computation.
        #[arg(long)]
        emit_timing: Option<PathBuf>,
    },
    /// Exact curve by counting cells at every threshold.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Per-pixel coefficients in the grid format with an i32 payload.
    Coeffs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Sigmoid-relaxed curve along one direction.
    Soft {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Comma-separated components, normalised before use.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        direction: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare analytic soft-curve gradients with central differences.
    Gradcheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Seeds the direction and the upstream weights.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        bins: usize,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Time the accumulation strategies on synthetic grids.
    Bench {
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<DimsArg>>,
        #[arg(long, default_value_t = 256)]
        bins: usize,
        #[arg(long, value_delimiter = ',', default_value = "fullsweep,chunked:4096")]
        strategies: Vec<AccumulationStrategy>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value = "uniform-random")]
        kind: SyntheticKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ThresholdArgs {
    /// Evenly spaced thresholds over the value range.
    #[arg(long)]
    bins: Option<usize>,
    /// CSV file with one threshold per row in the first column.
    #[arg(long)]
    taus: Option<PathBuf>,
}

impl ThresholdArgs {
    fn resolve(&self, grid: &ScalarGrid) -> Result<ThresholdSet> {
        match (&self.bins, &self.taus) {
            (Some(bins), _) => Ok(uniform_thresholds(grid, *bins)?),
            (None, Some(path)) => read_thresholds(path)
                .with_context(|| format!("reading thresholds from {}", path.display())),
            (None, None) => bail!("either --bins or --taus is required"),
        }
    }
}

/// Extents written as `AxB` or `AxBxC`.
#[derive(Debug, Clone)]
struct DimsArg(Vec<usize>);

impl std::str::FromStr for DimsArg {
    type Err = EccError;

    fn from_str(s: &str) -> ecc_core::Result<Self> {
        parse_dims(s).map(DimsArg)
    }
}

fn load(path: &Path) -> Result<ScalarGrid> {
    read_grid(path).with_context(|| format!("reading grid {}", path.display()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

#[derive(Serialize)]
struct Timing {
    strategy: String,
    workers: usize,
    dims: Vec<usize>,
    bins: usize,
    wall_ms: f64,
}

#[derive(Serialize)]
struct GradcheckOutput {
    #[serde(flatten)]
    report: ecc_core::gradcheck::GradcheckReport,
    seed: u64,
    bins: usize,
    tolerance: f64,
    passed: bool,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            kind,
            dims,
            seed,
            output,
        } => {
            let grid = generate_grid(&SyntheticSpec::new(kind, &dims.0, seed))?;
            write_grid(&grid, &output)?;
        }
        Command::Compute {
            input,
            thresholds,
            strategy,
            workers,
            output,
            emit_timing,
        } => {
            let grid = load(&input)?;
            let taus = thresholds.resolve(&grid)?;
            let start = Instant::now();
            let curve = compute_ecc(&grid, &taus, strategy, workers)?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            write_curve(&curve, &output)?;
            if let Some(path) = emit_timing {
                let timing = Timing {
                    strategy: strategy.to_string(),
                    workers,
                    dims: grid.dims().as_slice().to_vec(),
                    bins: taus.len(),
                    wall_ms,
                };
                write_json(&timing, &path)?;
            }
        }
        Command::Oracle {
            input,
            thresholds,
            output,
        } => {
            let grid = load(&input)?;
            let taus = thresholds.resolve(&grid)?;
            write_curve(&oracle_ecc(&grid, &taus), &output)?;
        }
        Command::Coeffs { input, output } => {
            let grid = load(&input)?;
            write_coefficients(&compute_coefficients(&grid), &output)?;
        }
        Command::Soft {
            input,
            thresholds,
            lambda,
            alpha,
            direction,
            workers,
            output,
        } => {
            let grid = load(&input)?;
            let ndim = grid.ndim();
            let direction = match direction {
                Some(v) => reparametrize_direction(&v)?,
                None => {
                    let mut u = vec![0.0; ndim];
                    u[ndim - 1] = 1.0;
                    u
                }
            };
            let seed_taus = ThresholdSet::new(vec![0.0])?;
            let params = SoftEccParams::new(lambda, alpha, direction, seed_taus)?;
            // Uniform bins span the tilted field the sigmoid is evaluated on.
            let field = effective_field(&grid, &params)?;
            let params = params.with_taus(thresholds.resolve(&field)?);
            let coeffs = soft_coefficients(&grid, &params, workers)?;
            write_curve(&soft_ecc(&grid, &coeffs, &params, workers)?, &output)?;
        }
        Command::Gradcheck {
            input,
            lambda,
            alpha,
            seed,
            bins,
            step,
            report,
        } => {
            let grid = load(&input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..grid.ndim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let direction = reparametrize_direction(&raw)?;
            let params = SoftEccParams::new(lambda, alpha, direction, ThresholdSet::new(vec![0.0])?)?;
            let field = effective_field(&grid, &params)?;
            let params = params.with_taus(uniform_thresholds(&field, bins)?);
            let coeffs = soft_coefficients(&grid, &params, 1)?;
            let upstream: Vec<f64> = (0..params.taus().len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let result = gradcheck(&grid, &coeffs, &params, &upstream, step)?;
            let passed = result.max_rel_err() <= GRADCHECK_TOLERANCE && result.tangency <= 1e-8;
            let output = GradcheckOutput {
                report: result,
                seed,
                bins: params.taus().len(),
                tolerance: GRADCHECK_TOLERANCE,
                passed,
            };
            write_json(&output, &report)?;
            if !passed {
                eprintln!("gradient check failed, see {}", report.display());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench {
            sizes,
            bins,
            strategies,
            workers,
            repeats,
            kind,
            seed,
            report,
            csv,
        } => {
            let defaults = BenchConfig::default();
            let config = BenchConfig {
                sizes: sizes.map_or(defaults.sizes, |s| s.into_iter().map(|d| d.0).collect()),
                bins,
                strategies,
                workers,
                repeats,
                kind,
                seed,
            };
            let result = match run_benchmark(&config) {
                Ok(result) => result,
                Err(e @ EccError::ChecksumMismatch { .. }) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::FAILURE);
                }
                Err(e) => return Err(e.into()),
            };
            for row in &result.rows {
                println!(
                    "{:>12} {:>16} workers={:<3} {:>10.3} ms  {}",
                    row.dims, row.strategy, row.workers, row.wall_ms, row.checksum
                );
            }
            for s in &result.speedups {
                println!("{:>12} {} / fullsweep = {:.2}x (workers={})", s.dims, s.strategy, s.speedup, s.workers);
            }
            if let Some(path) = report {
                write_json(&result, &path)?;
            }
            if let Some(path) = csv {
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                result.write_csv(BufWriter::new(file))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
