//! Benchmark harness for the accumulation strategies.
//!
//! Each configuration is warmed up once and then timed `repeats` times; the
//! median wall time is reported. Every strategy's curve must hash to the same
//! checksum for a given grid, otherwise the whole report is rejected.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{EccError, Result};
use crate::grid::{uniform_thresholds, Dims, HardCurve, ScalarGrid, ThresholdSet};
use crate::hard::{compute_ecc, AccumulationStrategy};
use crate::synth::{generate_grid, SyntheticKind, SyntheticSpec};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<Vec<usize>>,
    pub bins: usize,
    pub strategies: Vec<AccumulationStrategy>,
    pub workers: Vec<usize>,
    pub repeats: usize,
    pub kind: SyntheticKind,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![
                vec![128, 128],
                vec![256, 256],
                vec![512, 512],
                vec![1024, 1024],
                vec![64, 64, 64],
                vec![128, 128, 128],
            ],
            bins: 256,
            strategies: vec![
                AccumulationStrategy::FullSweep,
                AccumulationStrategy::Chunked { chunk_len: 4096 },
            ],
            workers: vec![1],
            repeats: 5,
            kind: SyntheticKind::UniformRandom,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub dims: String,
    pub pixels: usize,
    pub bins: usize,
    pub strategy: String,
    pub workers: usize,
    pub wall_ms: f64,
    pub repeats: usize,
    pub checksum: String,
}

/// Time of `strategy` divided by the full-sweep time on the same grid and
/// worker count.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Speedup {
    pub dims: String,
    pub workers: usize,
    pub strategy: String,
    pub speedup: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub speedups: Vec<Speedup>,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record([
            "dims", "pixels", "bins", "strategy", "workers", "wall_ms", "repeats", "checksum",
        ])?;
        for row in &self.rows {
            csv.write_record([
                row.dims.clone(),
                row.pixels.to_string(),
                row.bins.to_string(),
                row.strategy.clone(),
                row.workers.to_string(),
                format!("{:.6}", row.wall_ms),
                row.repeats.to_string(),
                row.checksum.clone(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

/// SHA-256 over the thresholds and values, first 16 hex digits.
pub fn curve_checksum(curve: &HardCurve) -> String {
    let mut hasher = Sha256::new();
    for (tau, chi) in curve.iter() {
        hasher.update(tau.to_le_bytes());
        hasher.update(chi.to_le_bytes());
    }
    hasher
        .finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of no samples");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Runs `f` once untimed, then `repeats` timed runs. Returns the median in
/// milliseconds and the last result.
pub fn time_median<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut last = f()?;
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        last = f()?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((median(&samples), last))
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    run_with(config, compute_ecc)
}

fn run_with<F>(config: &BenchConfig, compute: F) -> Result<BenchReport>
where
    F: Fn(&ScalarGrid, &ThresholdSet, AccumulationStrategy, usize) -> Result<HardCurve>,
{
    if config.strategies.is_empty() || config.workers.is_empty() || config.sizes.is_empty() {
        return Err(EccError::Argument(
            "benchmark needs at least one size, strategy and worker count".into(),
        ));
    }
    if config.repeats == 0 {
        return Err(EccError::Argument("repeats must be at least 1".into()));
    }
    let mut rows = Vec::new();
    let mut speedups = Vec::new();
    for size in &config.sizes {
        let dims = Dims::new(size)?;
        let grid = generate_grid(&SyntheticSpec::new(config.kind, size, config.seed))?;
        let taus = uniform_thresholds(&grid, config.bins)?;
        let mut expected: Option<String> = None;
        for &workers in &config.workers {
            let mut times = Vec::with_capacity(config.strategies.len());
            for &strategy in &config.strategies {
                let (wall_ms, curve) =
                    time_median(config.repeats, || compute(&grid, &taus, strategy, workers))?;
                let checksum = curve_checksum(&curve);
                match &expected {
                    None => expected = Some(checksum.clone()),
                    Some(e) if *e != checksum => {
                        return Err(EccError::ChecksumMismatch {
                            dims: dims.to_string(),
                            strategy: format!("{strategy} with {workers} workers"),
                            expected: e.clone(),
                            found: checksum,
                        })
                    }
                    Some(_) => {}
                }
                times.push((strategy, wall_ms));
                rows.push(BenchRow {
                    dims: dims.to_string(),
                    pixels: dims.len(),
                    bins: taus.len(),
                    strategy: strategy.to_string(),
                    workers,
                    wall_ms,
                    repeats: config.repeats,
                    checksum,
                });
            }
            if let Some(&(_, sweep_ms)) = times
                .iter()
                .find(|(s, _)| *s == AccumulationStrategy::FullSweep)
            {
                for &(strategy, ms) in &times {
                    if strategy != AccumulationStrategy::FullSweep {
                        speedups.push(Speedup {
                            dims: dims.to_string(),
                            workers,
                            strategy: strategy.to_string(),
                            speedup: ms / sweep_ms,
                        });
                    }
                }
            }
        }
    }
    Ok(BenchReport { rows, speedups })
}
