//! Per-pixel Euler characteristic coefficients.
//!
//! The grid is read as a cubical complex whose vertices are pixels and whose
//! edges, squares and cubes join axis-adjacent pixels. A cell enters the
//! sublevel filtration when its last vertex does, so each cell is attributed
//! to its maximal vertex under [`VertexOrder`]. The coefficient of a pixel is
//! the alternating count of the cells attributed to it (its lower star):
//!
//! ```text
//! c(p) = 1 - (lower edges) + (lower squares) - (lower cubes)
//! ```
//!
//! With that attribution `sum_p c(p) * [X(p) <= tau]` is exactly the Euler
//! characteristic of the sublevel set at `tau`, ties included.

use std::cmp::Ordering;
use std::ops::Range;
use std::sync::OnceLock;

use crate::error::{EccError, Result};
use crate::grid::{Dims, ScalarGrid};
use crate::parallel;

/// Total order on pixels: by value, then by row-major linear index.
#[derive(Debug, Clone, Copy)]
pub struct VertexOrder<'a> {
    values: &'a [f64],
}

impl<'a> VertexOrder<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        VertexOrder { values }
    }

    pub fn cmp(&self, p: usize, q: usize) -> Ordering {
        self.values[p]
            .partial_cmp(&self.values[q])
            .expect("grid values are finite")
            .then(p.cmp(&q))
    }

    /// `true` iff `p` comes strictly before `q`.
    pub fn precedes(&self, p: usize, q: usize) -> bool {
        self.cmp(p, q) == Ordering::Less
    }
}

/// Integer Euler coefficient per pixel, same shape as the source grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientGrid {
    dims: Dims,
    coeffs: Vec<i32>,
}

impl CoefficientGrid {
    /// Wraps raw coefficients. No topological invariant is checked, so this
    /// also admits sums of coefficient grids and hand-built fixtures.
    pub fn from_raw(dims: &[usize], coeffs: Vec<i32>) -> Result<Self> {
        let dims = Dims::new(dims)?;
        if coeffs.len() != dims.len() {
            return Err(EccError::Validation(format!(
                "coefficient grid {dims} needs {} entries, got {}",
                dims.len(),
                coeffs.len()
            )));
        }
        Ok(CoefficientGrid { dims, coeffs })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.coeffs.iter().map(|&c| i64::from(c)).sum()
    }

    pub fn abs_total(&self) -> i64 {
        self.coeffs.iter().map(|&c| i64::from(c).abs()).sum()
    }

    /// Element-wise sum.
    pub fn try_add(&self, other: &CoefficientGrid) -> Result<CoefficientGrid> {
        if self.dims != other.dims {
            return Err(EccError::Argument(format!(
                "cannot add coefficient grids {} and {}",
                self.dims, other.dims
            )));
        }
        Ok(CoefficientGrid {
            dims: self.dims.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }
}

const MAX_NEIGHBOURS: usize = 26;

// The 2D cell masks do not depend on the extents, so one table serves all shapes.
static TABLE_2D: OnceLock<[i8; 256]> = OnceLock::new();

#[derive(Debug, Clone, Copy, Default)]
struct Neighbour {
    delta: [isize; 3],
    linear: isize,
    /// Neighbour has the smaller linear index (wins value ties).
    before: bool,
}

/// Precomputed 3^n neighbourhood and lower-star cell masks for one grid
/// shape. Bit `k` of a neighbourhood mask refers to `neighbours[k]`.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    ndim: usize,
    dims: [usize; 3],
    neighbours: [Neighbour; MAX_NEIGHBOURS],
    count: usize,
    /// `(required neighbour mask, (-1)^dim)` for every cell containing the
    /// centre pixel other than the pixel itself.
    cells: [(u32, i32); MAX_NEIGHBOURS],
    /// 2D only: coefficient for each of the 256 lower-neighbour masks.
    table: Option<&'static [i8; 256]>,
}

impl Stencil {
    pub fn new(dims: &Dims) -> Self {
        let ndim = dims.ndim();
        let mut padded = [1usize; 3];
        padded[..ndim].copy_from_slice(dims.as_slice());
        let strides = dims.strides();

        let deltas = neighbour_deltas(ndim);
        let mut neighbours = [Neighbour::default(); MAX_NEIGHBOURS];
        for (slot, delta) in neighbours.iter_mut().zip(&deltas) {
            let linear = (0..ndim).map(|a| delta[a] * strides[a] as isize).sum();
            *slot = Neighbour {
                delta: *delta,
                linear,
                before: linear < 0,
            };
        }

        // A cell through p extends along axis a towards delta[a] when it is
        // non-zero; its other vertices are the non-zero sub-offsets of delta.
        let mut cells = [(0u32, 0i32); MAX_NEIGHBOURS];
        for (slot, cell) in cells.iter_mut().zip(&deltas) {
            let mut required = 0u32;
            for (k, other) in deltas.iter().enumerate() {
                let inside = (0..3).all(|a| other[a] == 0 || other[a] == cell[a]);
                if inside {
                    required |= 1 << k;
                }
            }
            let dim = cell.iter().filter(|&&d| d != 0).count();
            *slot = (required, if dim % 2 == 0 { 1 } else { -1 });
        }

        let count = deltas.len();
        let table = (ndim == 2).then(|| {
            TABLE_2D.get_or_init(|| {
                let mut table = [0i8; 256];
                for (mask, entry) in table.iter_mut().enumerate() {
                    *entry = lower_star_sum(&cells[..count], mask as u32) as i8;
                }
                table
            })
        });

        Stencil {
            ndim,
            dims: padded,
            neighbours,
            count,
            cells,
            table,
        }
    }

    /// Same stencil for a grid whose axis-0 extent is `extent`; the strides
    /// depend only on the trailing axes so only the bounds change.
    pub fn with_leading_extent(&self, extent: usize) -> Stencil {
        let mut out = *self;
        out.dims[0] = extent;
        out
    }

    /// Coefficient of the pixel at `linear` in `values`, a row-major buffer
    /// with this stencil's shape.
    #[inline]
    pub fn coefficient(&self, values: &[f64], linear: usize) -> i32 {
        let mut coords = [0usize; 3];
        let mut rest = linear;
        for axis in (0..self.ndim).rev() {
            coords[axis] = rest % self.dims[axis];
            rest /= self.dims[axis];
        }
        self.coefficient_at(values, linear, &coords)
    }

    /// Calls `f(linear, c)` for every pixel in `range`, in order. Works row by
    /// row so interior runs skip the bounds logic.
    #[inline]
    pub fn scan(&self, values: &[f64], range: Range<usize>, mut f: impl FnMut(usize, i32)) {
        let last = self.ndim - 1;
        let row_len = self.dims[last];
        let mut linear = range.start;
        while linear < range.end {
            let row_start = linear - linear % row_len;
            let stop = (row_start + row_len).min(range.end);
            let mut coords = [0usize; 3];
            let mut rest = linear;
            for axis in (0..self.ndim).rev() {
                coords[axis] = rest % self.dims[axis];
                rest /= self.dims[axis];
            }
            let outer_interior = (0..last).all(|a| coords[a] > 0 && coords[a] + 1 < self.dims[a]);
            if !outer_interior || row_len < 3 {
                for p in linear..stop {
                    coords[last] = p - row_start;
                    f(p, self.coefficient_at(values, p, &coords));
                }
                linear = stop;
                continue;
            }
            // Interior span of the row: columns 1 ..= row_len - 2.
            let lo = linear.max(row_start + 1);
            let hi = stop.min(row_start + row_len - 1);
            for p in linear..lo.min(stop) {
                coords[last] = p - row_start;
                f(p, self.coefficient_at(values, p, &coords));
            }
            if lo < hi {
                match self.table {
                    Some(table) => self.scan_row_2d(table, values, lo..hi, &mut f),
                    None => {
                        for p in lo..hi {
                            let mask = self.interior_mask::<26>(values, p);
                            f(p, lower_star_sum(&self.cells[..self.count], mask));
                        }
                    }
                }
            }
            for p in hi.max(linear)..stop {
                coords[last] = p - row_start;
                f(p, self.coefficient_at(values, p, &coords));
            }
            linear = stop;
        }
    }

    /// Interior pixels `span` of one 2D row, all with full 3x3 neighbourhoods.
    #[inline]
    fn scan_row_2d(
        &self,
        table: &[i8; 256],
        values: &[f64],
        span: Range<usize>,
        f: &mut impl FnMut(usize, i32),
    ) {
        let w = self.dims[1];
        let (lo, hi) = (span.start, span.end);
        let up = &values[lo - w - 1..hi - w + 1];
        let mid = &values[lo - 1..hi + 1];
        let down = &values[lo + w - 1..hi + w + 1];
        for i in 0..hi - lo {
            let c = mid[i + 1];
            // Bits follow the neighbour order; the first four come earlier in
            // the linear order and win ties.
            let mask = u32::from(up[i] <= c)
                | u32::from(up[i + 1] <= c) << 1
                | u32::from(up[i + 2] <= c) << 2
                | u32::from(mid[i] <= c) << 3
                | u32::from(mid[i + 2] < c) << 4
                | u32::from(down[i] < c) << 5
                | u32::from(down[i + 1] < c) << 6
                | u32::from(down[i + 2] < c) << 7;
            f(lo + i, i32::from(table[mask as usize]));
        }
    }

    #[inline]
    fn coefficient_at(&self, values: &[f64], linear: usize, coords: &[usize; 3]) -> i32 {
        let interior = (0..self.ndim).all(|a| coords[a] > 0 && coords[a] + 1 < self.dims[a]);
        let mask = match (interior, self.ndim) {
            (true, 2) => self.interior_mask::<8>(values, linear),
            (true, _) => self.interior_mask::<26>(values, linear),
            (false, _) => self.boundary_mask(values, linear, coords),
        };
        match self.table {
            Some(table) => i32::from(table[mask as usize]),
            None => lower_star_sum(&self.cells[..self.count], mask),
        }
    }

    #[inline]
    fn interior_mask<const N: usize>(&self, values: &[f64], linear: usize) -> u32 {
        let centre = values[linear];
        let mut mask = 0u32;
        for (k, n) in self.neighbours[..N].iter().enumerate() {
            let q = values[(linear as isize + n.linear) as usize];
            let lower = (q < centre) | ((q == centre) & n.before);
            mask |= u32::from(lower) << k;
        }
        mask
    }

    fn boundary_mask(&self, values: &[f64], linear: usize, coords: &[usize; 3]) -> u32 {
        let centre = values[linear];
        let mut mask = 0u32;
        for (k, n) in self.neighbours[..self.count].iter().enumerate() {
            let in_bounds = (0..self.ndim).all(|a| {
                let c = coords[a] as isize + n.delta[a];
                c >= 0 && (c as usize) < self.dims[a]
            });
            if !in_bounds {
                continue;
            }
            let q = values[(linear as isize + n.linear) as usize];
            let lower = (q < centre) | ((q == centre) & n.before);
            mask |= u32::from(lower) << k;
        }
        mask
    }
}

#[inline]
fn lower_star_sum(cells: &[(u32, i32)], lower_mask: u32) -> i32 {
    1 + cells
        .iter()
        .map(|&(required, sign)| sign * i32::from(lower_mask & required == required))
        .sum::<i32>()
}

/// All offsets in `{-1, 0, 1}^ndim` except zero, lexicographic order.
fn neighbour_deltas(ndim: usize) -> Vec<[isize; 3]> {
    let mut out = Vec::with_capacity(MAX_NEIGHBOURS);
    let span = |active: bool| if active { -1..=1 } else { 0..=0 };
    for a in span(true) {
        for b in span(true) {
            for c in span(ndim == 3) {
                if (a, b, c) != (0, 0, 0) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

pub fn compute_coefficients(grid: &ScalarGrid) -> CoefficientGrid {
    compute_coefficients_parallel(grid, 1)
}

/// Same result as [`compute_coefficients`] with the pixel range split
/// across `workers` threads.
pub fn compute_coefficients_parallel(grid: &ScalarGrid, workers: usize) -> CoefficientGrid {
    let stencil = Stencil::new(grid.dims());
    let values = grid.values();
    let parts = parallel::map_ranges(values.len(), workers, |range| {
        let mut out = Vec::with_capacity(range.len());
        stencil.scan(values, range, |_, c| out.push(c));
        out
    });
    CoefficientGrid {
        dims: grid.dims().clone(),
        coeffs: parts.concat(),
    }
}
