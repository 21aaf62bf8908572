//! Grid data model: dense scalar fields, threshold sets and Euler curves.
//!
//! All grids are stored row-major with the last axis varying fastest, so a
//! 2D grid with `dims = [rows, cols]` places `(r, c)` at `r * cols + c`.

use std::fmt;

use crate::error::{EccError, Result};

/// Largest number of samples a grid may hold.
///
/// Keeps `len * size_of::<f64>()` addressable and leaves room for the
/// per-pixel coefficient and mask buffers built alongside the values.
pub const MAX_PIXELS: usize = (isize::MAX as usize) / 16;

/// Validated grid extents for a 2D or 3D grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&extents.len()) {
            return Err(EccError::Validation(format!(
                "grids must be 2D or 3D, got {} axes",
                extents.len()
            )));
        }
        if let Some(axis) = extents.iter().position(|&d| d == 0) {
            return Err(EccError::Validation(format!("axis {axis} has zero extent")));
        }
        let mut total: usize = 1;
        for &d in extents {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= MAX_PIXELS)
                .ok_or_else(|| {
                    EccError::Capacity(format!("grid {extents:?} exceeds addressable memory"))
                })?;
        }
        Ok(Dims(extents.to_vec()))
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major strides, last axis stride 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.ndim()];
        for axis in (0..self.ndim() - 1).rev() {
            strides[axis] = strides[axis + 1] * self.0[axis + 1];
        }
        strides
    }

    /// Number of samples in one slab along axis 0 (a row in 2D, a plane in 3D).
    pub fn slab_len(&self) -> usize {
        self.0[1..].iter().product()
    }

    pub fn flatten(&self, index: &PixelIndex) -> usize {
        debug_assert_eq!(index.coords.len(), self.ndim());
        index
            .coords
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn unflatten(&self, mut linear: usize) -> PixelIndex {
        debug_assert!(linear < self.len());
        let mut coords = vec![0; self.ndim()];
        for axis in (0..self.ndim()).rev() {
            coords[axis] = linear % self.0[axis];
            linear /= self.0[axis];
        }
        PixelIndex { coords }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Per-axis coordinates of a grid point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelIndex {
    pub coords: Vec<usize>,
}

/// Dense real-valued field on a regular 2D or 3D grid.
///
/// Immutable after construction; all values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    dims: Dims,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(dims: &[usize], values: Vec<f64>) -> Result<Self> {
        let dims = Dims::new(dims)?;
        if values.len() != dims.len() {
            return Err(EccError::Validation(format!(
                "grid {dims} needs {} values, got {}",
                dims.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EccError::Validation(format!(
                "non-finite value {} at linear index {i}",
                values[i]
            )));
        }
        Ok(ScalarGrid { dims, values })
    }

    pub fn from_f32(dims: &[usize], values: &[f32]) -> Result<Self> {
        Self::new(dims, values.iter().map(|&v| f64::from(v)).collect())
    }

    #[inline]
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    #[inline]
    pub fn ndim(&self) -> usize {
        self.dims.ndim()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: &PixelIndex) -> f64 {
        self.values[self.dims.flatten(index)]
    }

    /// `(min, max)` over all values.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Sorted distinct values, useful as an exhaustive threshold set.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vals = self.values.clone();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| a == b);
        vals
    }

    /// Returns a new grid with `f` applied to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarGrid> {
        ScalarGrid::new(self.dims.as_slice(), self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Strictly increasing, finite evaluation thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet(Vec<f64>);

impl ThresholdSet {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(EccError::Validation("threshold set is empty".into()));
        }
        if let Some(t) = taus.iter().find(|t| !t.is_finite()) {
            return Err(EccError::Validation(format!("non-finite threshold {t}")));
        }
        if let Some(w) = taus.windows(2).find(|w| w[0] >= w[1]) {
            return Err(EccError::Validation(format!(
                "thresholds must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(ThresholdSet(taus))
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Copy with `tau` moved to `value`. Used by finite-difference probes;
    /// fails if the order would break.
    pub fn with_replaced(&self, j: usize, value: f64) -> Result<ThresholdSet> {
        let mut taus = self.0.clone();
        taus[j] = value;
        ThresholdSet::new(taus)
    }
}

/// `bins` thresholds at the right edges of equal-width intervals over
/// `[min(X), max(X)]`. The last threshold is exactly `max(X)`.
/// A constant grid collapses to the single threshold `max(X)`.
pub fn uniform_thresholds(grid: &ScalarGrid, bins: usize) -> Result<ThresholdSet> {
    if bins == 0 {
        return Err(EccError::Argument("bins must be at least 1".into()));
    }
    let (lo, hi) = grid.range();
    if lo == hi {
        return ThresholdSet::new(vec![hi]);
    }
    let width = hi - lo;
    let mut taus: Vec<f64> = (1..bins)
        .map(|j| lo + width * (j as f64 / bins as f64))
        .filter(|&t| t < hi)
        .collect();
    taus.push(hi);
    // Very narrow ranges can round neighbouring edges onto the same float.
    taus.dedup_by(|a, b| a == b);
    ThresholdSet::new(taus)
}

/// Value type stored in an [`EulerCurve`]: `i64` on the exact path, `f64`
/// on the soft path.
pub trait CurveValue: Copy + PartialEq + fmt::Debug {
    /// Text used for the `chi` column of curve CSV files.
    fn to_csv_field(&self) -> String;
}

impl CurveValue for i64 {
    fn to_csv_field(&self) -> String {
        self.to_string()
    }
}

impl CurveValue for f64 {
    fn to_csv_field(&self) -> String {
        format_significant(*self, 9)
    }
}

/// `(tau_j, chi_j)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerCurve<V> {
    taus: Vec<f64>,
    values: Vec<V>,
}

pub type HardCurve = EulerCurve<i64>;
pub type SoftCurve = EulerCurve<f64>;

impl<V: CurveValue> EulerCurve<V> {
    pub fn new(taus: &ThresholdSet, values: Vec<V>) -> Result<Self> {
        if values.len() != taus.len() {
            return Err(EccError::Argument(format!(
                "curve has {} values for {} thresholds",
                values.len(),
                taus.len()
            )));
        }
        Ok(EulerCurve {
            taus: taus.as_slice().to_vec(),
            values,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, V)> + '_ {
        self.taus.iter().copied().zip(self.values.iter().copied())
    }
}

/// Formats like C's `%.{digits}g`: shortest of fixed/scientific, trailing
/// zeros trimmed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    // Exponent after rounding to `digits` significant figures.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
