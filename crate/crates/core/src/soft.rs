//! Soft Euler characteristic curve along one direction, with analytic
//! gradients.
//!
//! The hard indicator `[X(p) <= tau]` is replaced by a logistic sigmoid of
//! sharpness `lambda`, and the field is tilted along a unit direction `u`
//! with scale `alpha`:
//!
//! ```text
//! z_p(tau) = tau - X(p) - alpha * <u, p>
//! chi(tau) = sum_p c(p) * sigmoid(lambda * z_p(tau))
//! ```
//!
//! Pixel positions `p` are normalized to `[-1, 1]` per axis. The coefficients
//! `c(p)` are piecewise constant in the field and are treated as fixed inputs:
//! gradients flow only through the sigmoid arguments.

use crate::coeff::{compute_coefficients_parallel, CoefficientGrid};
use crate::error::{EccError, Result};
use crate::grid::{Dims, EulerCurve, ScalarGrid, SoftCurve, ThresholdSet};
use crate::parallel;

const UNIT_TOLERANCE: f64 = 1e-12;
const MIN_DIRECTION_NORM: f64 = 1e-12;

/// `1 / (1 + exp(-lambda * z))`, evaluated without overflow.
#[inline]
pub fn sigmoid(lambda: f64, z: f64) -> f64 {
    let t = lambda * z;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Derivative of [`sigmoid`] in `z`: `lambda * s * (1 - s)`.
#[inline]
pub fn sigmoid_grad(lambda: f64, z: f64) -> f64 {
    let e = (-(lambda * z).abs()).exp();
    let denom = 1.0 + e;
    lambda * e / (denom * denom)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maps an unconstrained vector onto the unit sphere.
pub fn reparametrize_direction(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if !n.is_finite() || n <= MIN_DIRECTION_NORM {
        return Err(EccError::DegenerateDirection(n));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Jacobian-vector product of [`reparametrize_direction`] at `v`:
/// `(dv - u <u, dv>) / |v|`.
pub fn reparametrize_jvp(v: &[f64], dv: &[f64]) -> Result<Vec<f64>> {
    let u = reparametrize_direction(v)?;
    let n = norm(v);
    let along = dot(&u, dv);
    Ok(dv.iter().zip(&u).map(|(d, ui)| (d - along * ui) / n).collect())
}

/// Vector-Jacobian product of [`reparametrize_direction`] at `v`; the
/// normalization Jacobian is symmetric, so this equals the JVP.
pub fn reparametrize_vjp(v: &[f64], grad_u: &[f64]) -> Result<Vec<f64>> {
    reparametrize_jvp(v, grad_u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftEccParams {
    lambda: f64,
    alpha: f64,
    direction: Vec<f64>,
    taus: ThresholdSet,
}

impl SoftEccParams {
    pub fn new(lambda: f64, alpha: f64, direction: Vec<f64>, taus: ThresholdSet) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(EccError::Argument(format!("lambda must be positive, got {lambda}")));
        }
        if !alpha.is_finite() {
            return Err(EccError::Argument(format!("alpha must be finite, got {alpha}")));
        }
        if !(2..=3).contains(&direction.len()) {
            return Err(EccError::Argument(format!(
                "direction needs 2 or 3 components, got {}",
                direction.len()
            )));
        }
        let n = norm(&direction);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(EccError::Argument(format!(
                "direction must have unit norm, got {n}"
            )));
        }
        Ok(SoftEccParams {
            lambda,
            alpha,
            direction,
            taus,
        })
    }

    /// No tilt: `alpha = 0` along the first axis.
    pub fn untilted(lambda: f64, ndim: usize, taus: ThresholdSet) -> Result<Self> {
        let mut u = vec![0.0; ndim];
        if let Some(first) = u.first_mut() {
            *first = 1.0;
        }
        Self::new(lambda, 0.0, u, taus)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn taus(&self) -> &ThresholdSet {
        &self.taus
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.alpha, self.direction.clone(), self.taus.clone())
    }

    pub fn with_taus(&self, taus: ThresholdSet) -> Self {
        SoftEccParams {
            taus,
            ..self.clone()
        }
    }

    pub fn with_direction(&self, direction: Vec<f64>) -> Result<Self> {
        Self::new(self.lambda, self.alpha, direction, self.taus.clone())
    }
}

/// Per-axis pixel positions, index range `0..d` mapped affinely to
/// `[-1, 1]`. Single-pixel axes sit at 0.
#[derive(Debug, Clone)]
pub struct PixelCoordinates {
    dims: Dims,
    axes: Vec<Vec<f64>>,
}

impl PixelCoordinates {
    pub fn new(dims: &Dims) -> Self {
        let axes = dims
            .as_slice()
            .iter()
            .map(|&d| {
                if d == 1 {
                    vec![0.0]
                } else {
                    let scale = 2.0 / (d - 1) as f64;
                    (0..d).map(|k| k as f64 * scale - 1.0).collect()
                }
            })
            .collect();
        PixelCoordinates {
            dims: dims.clone(),
            axes,
        }
    }

    pub fn position(&self, linear: usize) -> Vec<f64> {
        let idx = self.dims.unflatten(linear);
        idx.coords
            .iter()
            .zip(&self.axes)
            .map(|(&c, axis)| axis[c])
            .collect()
    }

    /// `<u, p>` for every pixel, row-major.
    pub fn projections(&self, u: &[f64]) -> Vec<f64> {
        let dims = self.dims.as_slice();
        let mut out = Vec::with_capacity(self.dims.len());
        match dims.len() {
            2 => {
                for &y in &self.axes[0] {
                    for &x in &self.axes[1] {
                        out.push(u[0] * y + u[1] * x);
                    }
                }
            }
            _ => {
                for &z in &self.axes[0] {
                    for &y in &self.axes[1] {
                        for &x in &self.axes[2] {
                            out.push(u[0] * z + u[1] * y + u[2] * x);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Analytic gradients of `sum_j upstream[j] * chi(tau_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftGradients {
    pub d_values: Vec<f64>,
    pub d_tau: Vec<f64>,
    /// Projected onto the tangent space of the unit sphere at `u`.
    pub d_u: Vec<f64>,
}

fn check_direction(grid: &ScalarGrid, params: &SoftEccParams) -> Result<()> {
    if params.direction.len() != grid.ndim() {
        return Err(EccError::Argument(format!(
            "direction has {} components for a {}D grid",
            params.direction.len(),
            grid.ndim()
        )));
    }
    Ok(())
}

fn check_shapes(grid: &ScalarGrid, coeffs: &CoefficientGrid, params: &SoftEccParams) -> Result<()> {
    if coeffs.dims() != grid.dims() {
        return Err(EccError::Argument(format!(
            "coefficient grid {} does not match grid {}",
            coeffs.dims(),
            grid.dims()
        )));
    }
    check_direction(grid, params)
}

/// `X(p) + alpha * <u, p>`, the field whose sublevel sets the soft curve
/// relaxes.
pub fn effective_field(grid: &ScalarGrid, params: &SoftEccParams) -> Result<ScalarGrid> {
    check_direction(grid, params)?;
    if params.alpha == 0.0 {
        return Ok(grid.clone());
    }
    let proj = PixelCoordinates::new(grid.dims()).projections(&params.direction);
    let values = grid
        .values()
        .iter()
        .zip(&proj)
        .map(|(x, p)| x + params.alpha * p)
        .collect();
    ScalarGrid::new(grid.dims().as_slice(), values)
}

/// Coefficients of the effective field, the expected `coeffs` input of
/// [`soft_ecc`] and [`soft_ecc_backward`].
pub fn soft_coefficients(
    grid: &ScalarGrid,
    params: &SoftEccParams,
    workers: usize,
) -> Result<CoefficientGrid> {
    Ok(compute_coefficients_parallel(&effective_field(grid, params)?, workers))
}

fn shifted_values(grid: &ScalarGrid, params: &SoftEccParams) -> Vec<f64> {
    if params.alpha == 0.0 {
        return grid.values().to_vec();
    }
    let proj = PixelCoordinates::new(grid.dims()).projections(&params.direction);
    grid.values()
        .iter()
        .zip(&proj)
        .map(|(x, p)| x + params.alpha * p)
        .collect()
}

fn add_into(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Soft curve at every threshold of `params`.
///
/// Each worker sums its share of the pixels in order and the partial curves
/// are combined in a fixed pairwise tree, so repeated calls with the same
/// `workers` give bit-identical results.
pub fn soft_ecc(
    grid: &ScalarGrid,
    coeffs: &CoefficientGrid,
    params: &SoftEccParams,
    workers: usize,
) -> Result<SoftCurve> {
    check_shapes(grid, coeffs, params)?;
    let shifted = shifted_values(grid, params);
    let c = coeffs.coeffs();
    let taus = params.taus.as_slice();
    let lambda = params.lambda;

    let parts = parallel::map_ranges(shifted.len(), workers, |range| {
        let mut acc = vec![0.0f64; taus.len()];
        for p in range {
            if c[p] == 0 {
                continue;
            }
            let weight = f64::from(c[p]);
            let s = shifted[p];
            for (a, &tau) in acc.iter_mut().zip(taus) {
                *a += weight * sigmoid(lambda, tau - s);
            }
        }
        acc
    });
    let values = parallel::tree_reduce(parts, add_into).expect("at least one worker");
    EulerCurve::new(&params.taus, values)
}

struct BackwardPart {
    d_values: Vec<f64>,
    d_tau: Vec<f64>,
    d_u: Vec<f64>,
}

/// Analytic gradients of `L = sum_j upstream[j] * chi(tau_j)` with the
/// coefficients held fixed:
///
/// ```text
/// dL/dX(p)   = -c(p) * sum_j upstream[j] * sigmoid'(z_p(tau_j))
/// dL/dtau_j  =  upstream[j] * sum_p c(p) * sigmoid'(z_p(tau_j))
/// dL/du      = -alpha * sum_j upstream[j] * sum_p c(p) * sigmoid'(z_p(tau_j)) * p
/// ```
///
/// `d_u` is then projected to the tangent space at `u`.
pub fn soft_ecc_backward(
    grid: &ScalarGrid,
    coeffs: &CoefficientGrid,
    params: &SoftEccParams,
    upstream: &[f64],
    workers: usize,
) -> Result<SoftGradients> {
    check_shapes(grid, coeffs, params)?;
    let taus = params.taus.as_slice();
    if upstream.len() != taus.len() {
        return Err(EccError::Argument(format!(
            "upstream has {} entries for {} thresholds",
            upstream.len(),
            taus.len()
        )));
    }
    let ndim = grid.ndim();
    let coords = PixelCoordinates::new(grid.dims());
    let shifted = shifted_values(grid, params);
    let c = coeffs.coeffs();
    let (lambda, alpha) = (params.lambda, params.alpha);

    let parts = parallel::map_ranges(shifted.len(), workers, |range| {
        let mut part = BackwardPart {
            d_values: vec![0.0; range.len()],
            d_tau: vec![0.0; taus.len()],
            d_u: vec![0.0; ndim],
        };
        let start = range.start;
        for p in range {
            if c[p] == 0 {
                continue;
            }
            let weight = f64::from(c[p]);
            let s = shifted[p];
            let mut weighted = 0.0;
            for ((dt, &tau), &up) in part.d_tau.iter_mut().zip(taus).zip(upstream) {
                let g = weight * sigmoid_grad(lambda, tau - s);
                *dt += g;
                weighted += up * g;
            }
            part.d_values[p - start] = -weighted;
            if alpha != 0.0 {
                for (du, x) in part.d_u.iter_mut().zip(coords.position(p)) {
                    *du -= alpha * weighted * x;
                }
            }
        }
        part
    });

    let mut d_values = Vec::with_capacity(shifted.len());
    let mut tau_parts = Vec::with_capacity(parts.len());
    let mut u_parts = Vec::with_capacity(parts.len());
    for part in parts {
        d_values.extend_from_slice(&part.d_values);
        tau_parts.push(part.d_tau);
        u_parts.push(part.d_u);
    }
    let mut d_tau = parallel::tree_reduce(tau_parts, add_into).expect("at least one worker");
    for (dt, up) in d_tau.iter_mut().zip(upstream) {
        *dt *= up;
    }
    let mut d_u = parallel::tree_reduce(u_parts, add_into).expect("at least one worker");
    let u = &params.direction;
    let radial = dot(&d_u, u);
    for (du, ui) in d_u.iter_mut().zip(u) {
        *du -= radial * ui;
    }

    Ok(SoftGradients {
        d_values,
        d_tau,
        d_u,
    })
}
