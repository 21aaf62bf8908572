//! Seeded synthetic grids for tests and benchmarks.
//!
//! Values are rounded to `f32` precision so a generated grid written to disk
//! and read back is identical to the in-memory one.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EccError, Result};
use crate::grid::{Dims, ScalarGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Independent samples in `[0, 1)`.
    UniformRandom,
    /// Sum of `count` isotropic Gaussian bumps. `width` is the standard
    /// deviation as a fraction of the longest axis.
    GaussianBlobs { count: usize, width: f64 },
    /// Distance to the grid centre, scaled so the corners are 1.
    RadialGradient,
}

impl SyntheticKind {
    pub const DEFAULT_BLOBS: SyntheticKind = SyntheticKind::GaussianBlobs {
        count: 16,
        width: 0.05,
    };
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntheticKind::UniformRandom => f.write_str("uniform-random"),
            SyntheticKind::GaussianBlobs { .. } => f.write_str("gaussian-blobs"),
            SyntheticKind::RadialGradient => f.write_str("radial-gradient"),
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = EccError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-random" => Ok(SyntheticKind::UniformRandom),
            "gaussian-blobs" => Ok(SyntheticKind::DEFAULT_BLOBS),
            "radial-gradient" => Ok(SyntheticKind::RadialGradient),
            other => Err(EccError::Argument(format!(
                "unknown grid kind {other:?}, expected uniform-random, gaussian-blobs or radial-gradient"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub dims: Vec<usize>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, dims: &[usize], seed: u64) -> Self {
        SyntheticSpec {
            kind,
            dims: dims.to_vec(),
            seed,
        }
    }
}

/// Parses extents like `512x512` or `64x64x64`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let dims = s
        .split(['x', 'X'])
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| EccError::Argument(format!("bad extent {part:?} in {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Dims::new(&dims).map_err(|e| match e {
        EccError::Validation(msg) => EccError::Argument(msg),
        other => other,
    })?;
    Ok(dims)
}

fn round_f32(v: f64) -> f64 {
    f64::from(v as f32)
}

pub fn generate_grid(spec: &SyntheticSpec) -> Result<ScalarGrid> {
    let dims = Dims::new(&spec.dims)?;
    let n = dims.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values: Vec<f64> = match spec.kind {
        SyntheticKind::UniformRandom => (0..n).map(|_| round_f32(rng.random::<f64>())).collect(),
        SyntheticKind::RadialGradient => {
            let centre: Vec<f64> = dims.as_slice().iter().map(|&d| (d as f64 - 1.0) / 2.0).collect();
            let radius = centre.iter().map(|c| c * c).sum::<f64>().sqrt();
            (0..n)
                .map(|i| {
                    if radius == 0.0 {
                        return 0.0;
                    }
                    let idx = dims.unflatten(i);
                    let r = idx
                        .coords
                        .iter()
                        .zip(&centre)
                        .map(|(&c, m)| (c as f64 - m).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    round_f32(r / radius)
                })
                .collect()
        }
        SyntheticKind::GaussianBlobs { count, width } => {
            if !width.is_finite() || width <= 0.0 {
                return Err(EccError::Argument(format!("blob width must be positive and finite, got {width}")));
            }
            let longest = *dims.as_slice().iter().max().unwrap() as f64;
            let sigma = width * longest;
            let blobs: Vec<(Vec<f64>, f64)> = (0..count)
                .map(|_| {
                    let centre = dims
                        .as_slice()
                        .iter()
                        .map(|&d| rng.random::<f64>() * d as f64)
                        .collect();
                    let amplitude = 0.5 + rng.random::<f64>();
                    (centre, amplitude)
                })
                .collect();
            let inv = 1.0 / (2.0 * sigma * sigma);
            (0..n)
                .map(|i| {
                    let idx = dims.unflatten(i);
                    let v: f64 = blobs
                        .iter()
                        .map(|(centre, amp)| {
                            let d2: f64 = idx
                                .coords
                                .iter()
                                .zip(centre)
                                .map(|(&c, m)| (c as f64 - m).powi(2))
                                .sum();
                            amp * (-d2 * inv).exp()
                        })
                        .sum();
                    round_f32(v)
                })
                .collect()
        }
    };
    ScalarGrid::new(dims.as_slice(), values)
}
