//! Euler characteristic curves of dense 2D and 3D scalar grids.
//!
//! * [`hard`]: exact curves from per-pixel coefficients and a weighted
//!   histogram, with a full-sweep and a chunked accumulation strategy.
//! * [`soft`]: sigmoid-relaxed curves along one learnable direction, with
//!   analytic gradients for the field, the thresholds and the direction.
//! * [`oracle`]: brute-force cell counting, the ground truth for both.
//!
//! ```
//! use ecc_core::{compute_ecc, AccumulationStrategy, ScalarGrid, ThresholdSet};
//!
//! // A ring of zeros around a single high pixel.
//! let mut values = vec![0.0; 9];
//! values[4] = 1.0;
//! let grid = ScalarGrid::new(&[3, 3], values).unwrap();
//! let taus = ThresholdSet::new(vec![0.0, 1.0]).unwrap();
//! let curve = compute_ecc(&grid, &taus, AccumulationStrategy::FullSweep, 1).unwrap();
//! assert_eq!(curve.values(), &[0, 1]);
//! ```

pub mod bench;
pub mod coeff;
pub mod error;
pub mod gradcheck;
pub mod grid;
pub mod hard;
pub mod io;
pub mod oracle;
pub mod parallel;
pub mod soft;
pub mod synth;

pub use coeff::{compute_coefficients, compute_coefficients_parallel, CoefficientGrid, VertexOrder};
pub use error::{EccError, Result};
pub use grid::{
    uniform_thresholds, Dims, EulerCurve, HardCurve, PixelIndex, ScalarGrid, SoftCurve,
    ThresholdSet,
};
pub use hard::{bin_index, compute_ecc, merge_histograms, AccumulationStrategy, HistogramBins};
pub use io::{read_grid, write_grid};
pub use oracle::{count_cells, oracle_ecc, sublevel_mask, BinaryMask, CellCounts};
pub use soft::{
    reparametrize_direction, soft_ecc, soft_ecc_backward, PixelCoordinates, SoftEccParams,
    SoftGradients,
};
pub use synth::{generate_grid, SyntheticKind, SyntheticSpec};
