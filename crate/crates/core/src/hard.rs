//! Exact Euler characteristic curves by weighted histogram accumulation.
//!
//! Every pixel deposits its coefficient into the bin of the smallest
//! threshold that covers its value; a prefix sum over the bins yields the
//! curve. Two accumulation strategies are provided:
//!
//! * [`AccumulationStrategy::FullSweep`]: each worker sweeps one contiguous
//!   share of the grid into a private histogram, and the private histograms
//!   are merged once at the end.
//! * [`AccumulationStrategy::Chunked`]: the grid is cut into fixed-length
//!   chunks. Each chunk copies its slabs plus a one-slab halo into a local
//!   tile, computes coefficients over the chunk and its halo, accumulates
//!   the owned pixels into a fresh histogram and merges it into the shared
//!   global histogram before the next chunk starts. This is the reference
//!   baseline.
//!
//! Sums are `i64`, so both strategies give bit-identical curves for any
//! worker count.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::coeff::Stencil;
use crate::error::{EccError, Result};
use crate::grid::{EulerCurve, HardCurve, ScalarGrid, ThresholdSet};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccumulationStrategy {
    FullSweep,
    Chunked { chunk_len: usize },
}

impl AccumulationStrategy {
    pub fn chunked(chunk_len: usize) -> Result<Self> {
        if chunk_len == 0 {
            return Err(EccError::Argument("chunk length must be at least 1".into()));
        }
        Ok(AccumulationStrategy::Chunked { chunk_len })
    }
}

impl fmt::Display for AccumulationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccumulationStrategy::FullSweep => f.write_str("fullsweep"),
            AccumulationStrategy::Chunked { chunk_len } => write!(f, "chunked:{chunk_len}"),
        }
    }
}

impl FromStr for AccumulationStrategy {
    type Err = EccError;

    /// Parses `fullsweep` or `chunked:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("fullsweep") {
            return Ok(AccumulationStrategy::FullSweep);
        }
        if let Some(k) = s.strip_prefix("chunked:") {
            let k = k
                .parse::<usize>()
                .map_err(|_| EccError::Argument(format!("bad chunk length in {s:?}")))?;
            return AccumulationStrategy::chunked(k);
        }
        Err(EccError::Argument(format!(
            "unknown strategy {s:?}, expected fullsweep or chunked:<k>"
        )))
    }
}

/// Per-threshold coefficient totals. `overflow` collects pixels above the
/// last threshold, so `bins.sum() + overflow` is the coefficient total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramBins {
    pub bins: Vec<i64>,
    pub overflow: i64,
}

impl HistogramBins {
    pub fn zeros(len: usize) -> Self {
        HistogramBins {
            bins: vec![0; len],
            overflow: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.bins.iter().sum::<i64>() + self.overflow
    }

    #[inline]
    fn deposit(&mut self, bin: Option<usize>, weight: i64) {
        match bin {
            Some(j) => self.bins[j] += weight,
            None => self.overflow += weight,
        }
    }

    fn add_assign(&mut self, other: &HistogramBins) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.overflow += other.overflow;
    }

    fn clear(&mut self) {
        self.bins.iter_mut().for_each(|b| *b = 0);
        self.overflow = 0;
    }

    /// Running sum over the bins: the value at `j` counts every pixel with
    /// `X(p) <= taus[j]`.
    pub fn prefix_curve(&self, taus: &ThresholdSet) -> Result<HardCurve> {
        let values = self
            .bins
            .iter()
            .scan(0i64, |acc, &b| {
                *acc += b;
                Some(*acc)
            })
            .collect();
        EulerCurve::new(taus, values)
    }
}

/// Element-wise sum of histograms over the same thresholds.
pub fn merge_histograms(parts: &[HistogramBins]) -> Result<HistogramBins> {
    let first = parts
        .first()
        .ok_or_else(|| EccError::Argument("no histograms to merge".into()))?;
    if let Some(bad) = parts.iter().find(|h| h.len() != first.len()) {
        return Err(EccError::Argument(format!(
            "histograms have {} and {} bins",
            first.len(),
            bad.len()
        )));
    }
    let mut out = HistogramBins::zeros(first.len());
    for part in parts {
        out.add_assign(part);
    }
    Ok(out)
}

/// Smallest `j` with `x <= taus[j]`, or `None` when `x` exceeds every
/// threshold.
#[inline]
pub fn bin_index(x: f64, taus: &ThresholdSet) -> Option<usize> {
    let taus = taus.as_slice();
    let j = taus.partition_point(|&t| t < x);
    (j < taus.len()).then_some(j)
}

/// Bucketed accelerator for [`bin_index`]. The span of the thresholds is cut
/// into equal buckets, each holding a starting bin; a short walk from there
/// finds the exact bin, so the result never depends on rounding of the
/// bucket edges.
#[derive(Debug, Clone)]
pub struct BinLookup<'a> {
    taus: &'a [f64],
    lo: f64,
    scale: f64,
    start: Vec<u32>,
}

impl<'a> BinLookup<'a> {
    const BUCKETS_PER_BIN: usize = 4;

    pub fn new(taus: &'a ThresholdSet) -> Self {
        let taus = taus.as_slice();
        let lo = taus[0];
        let hi = taus[taus.len() - 1];
        let buckets = (taus.len() * Self::BUCKETS_PER_BIN).max(1);
        let span = hi - lo;
        let scale = if span > 0.0 && (buckets as f64 / span).is_finite() {
            buckets as f64 / span
        } else {
            0.0
        };
        let mut start = Vec::with_capacity(buckets);
        let mut j = 0usize;
        for k in 0..buckets {
            let edge = if scale > 0.0 { lo + k as f64 / scale } else { lo };
            while j + 1 < taus.len() && taus[j] < edge {
                j += 1;
            }
            start.push(j as u32);
        }
        BinLookup { taus, lo, scale, start }
    }

    /// Same result as [`bin_index`].
    #[inline]
    pub fn get(&self, x: f64) -> Option<usize> {
        let taus = self.taus;
        if x <= self.lo {
            return Some(0);
        }
        if x > taus[taus.len() - 1] {
            return None;
        }
        let k = (((x - self.lo) * self.scale) as usize).min(self.start.len() - 1);
        let mut j = self.start[k] as usize;
        while j > 0 && taus[j - 1] >= x {
            j -= 1;
        }
        while taus[j] < x {
            j += 1;
        }
        Some(j)
    }
}

/// Pixels per block of a worker's sweep. A block's coefficients stay in
/// cache between the coefficient pass and the binning pass.
const SWEEP_BLOCK: usize = 2048;

fn sweep_range(
    stencil: &Stencil,
    values: &[f64],
    lookup: &BinLookup,
    range: std::ops::Range<usize>,
    hist: &mut HistogramBins,
) {
    let mut coeffs = Vec::with_capacity(SWEEP_BLOCK);
    let mut start = range.start;
    while start < range.end {
        let end = (start + SWEEP_BLOCK).min(range.end);
        coeffs.clear();
        stencil.scan(values, start..end, |_, c| coeffs.push(c));
        for (&c, &x) in coeffs.iter().zip(&values[start..end]) {
            if c != 0 {
                hist.deposit(lookup.get(x), i64::from(c));
            }
        }
        start = end;
    }
}

/// Coefficient histogram of `grid` over `taus`.
pub fn accumulate(
    grid: &ScalarGrid,
    taus: &ThresholdSet,
    strategy: AccumulationStrategy,
    workers: usize,
) -> Result<HistogramBins> {
    if workers == 0 {
        return Err(EccError::Argument("workers must be at least 1".into()));
    }
    match strategy {
        AccumulationStrategy::FullSweep => Ok(full_sweep(grid, taus, workers)),
        AccumulationStrategy::Chunked { chunk_len } => {
            if chunk_len == 0 {
                return Err(EccError::Argument("chunk length must be at least 1".into()));
            }
            Ok(chunked(grid, taus, chunk_len, workers))
        }
    }
}

fn full_sweep(grid: &ScalarGrid, taus: &ThresholdSet, workers: usize) -> HistogramBins {
    let stencil = Stencil::new(grid.dims());
    let values = grid.values();
    let lookup = BinLookup::new(taus);
    let parts = parallel::map_ranges(values.len(), workers, |range| {
        let mut hist = HistogramBins::zeros(taus.len());
        sweep_range(&stencil, values, &lookup, range, &mut hist);
        hist
    });
    merge_histograms(&parts).expect("parts share the threshold set")
}

fn chunked(grid: &ScalarGrid, taus: &ThresholdSet, chunk_len: usize, workers: usize) -> HistogramBins {
    let values = grid.values();
    let slab = grid.dims().slab_len();
    let leading = grid.dims().as_slice()[0];
    let stencil = Stencil::new(grid.dims());
    let lookup = BinLookup::new(taus);
    let n_chunks = values.len().div_ceil(chunk_len);

    let global = Mutex::new(HistogramBins::zeros(taus.len()));
    let next_chunk = AtomicUsize::new(0);

    let work = || {
        let mut tile: Vec<f64> = Vec::new();
        let mut tile_coeffs: Vec<i32> = Vec::new();
        let mut local = HistogramBins::zeros(taus.len());
        loop {
            let chunk = next_chunk.fetch_add(1, Ordering::Relaxed);
            if chunk >= n_chunks {
                break;
            }
            let start = chunk * chunk_len;
            let end = (start + chunk_len).min(values.len());

            // Slabs touched by the chunk, widened by one slab of halo on each side.
            let first_slab = (start / slab).saturating_sub(1);
            let last_slab = ((end - 1) / slab + 2).min(leading);
            let offset = first_slab * slab;
            tile.clear();
            tile.extend_from_slice(&values[offset..last_slab * slab]);
            let tile_stencil = stencil.with_leading_extent(last_slab - first_slab);

            // Coefficients for the chunk and its halo; the halo entries are
            // recomputed by the neighbouring chunks and discarded here.
            let halo_start = start.saturating_sub(slab).max(offset);
            let halo_end = (end + slab).min(last_slab * slab);
            tile_coeffs.clear();
            tile_stencil.scan(&tile, halo_start - offset..halo_end - offset, |_, c| {
                tile_coeffs.push(c)
            });

            local.clear();
            let owned = &tile_coeffs[start - halo_start..end - halo_start];
            for (&c, &x) in owned.iter().zip(&values[start..end]) {
                if c != 0 {
                    local.deposit(lookup.get(x), i64::from(c));
                }
            }
            global.lock().expect("histogram lock").add_assign(&local);
        }
    };

    let workers = workers.min(n_chunks).max(1);
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(work);
            }
        });
    }
    global.into_inner().expect("histogram lock")
}

/// Exact Euler characteristic curve of `grid` at every threshold.
pub fn compute_ecc(
    grid: &ScalarGrid,
    taus: &ThresholdSet,
    strategy: AccumulationStrategy,
    workers: usize,
) -> Result<HardCurve> {
    accumulate(grid, taus, strategy, workers)?.prefix_curve(taus)
}
