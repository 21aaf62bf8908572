//! Central finite-difference check of the soft-curve gradients.
//!
//! Uses only the forward pass. The coefficient grid is frozen at the
//! evaluation point, and the direction is perturbed through
//! [`reparametrize_direction`] so the finite differences land on the tangent
//! space, where the analytic `d_u` lives.

use serde::Serialize;

use crate::coeff::CoefficientGrid;
use crate::error::Result;
use crate::grid::ScalarGrid;
use crate::soft::{reparametrize_direction, soft_ecc, soft_ecc_backward, SoftEccParams};

/// Gradients smaller than this in magnitude are compared in absolute terms.
pub const RELATIVE_ERROR_FLOOR: f64 = 1.0;

/// `|a - b| / max(|a|, |b|, RELATIVE_ERROR_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_ERROR_FLOOR)
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub lambda: f64,
    pub alpha: f64,
    pub direction: Vec<f64>,
    pub step: f64,
    pub max_rel_err_values: f64,
    pub max_rel_err_tau: f64,
    pub max_rel_err_direction: f64,
    /// `|<d_u, u>|` of the analytic direction gradient.
    pub tangency: f64,
}

impl GradcheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err_values
            .max(self.max_rel_err_tau)
            .max(self.max_rel_err_direction)
    }
}

fn loss(
    grid: &ScalarGrid,
    coeffs: &CoefficientGrid,
    params: &SoftEccParams,
    upstream: &[f64],
) -> Result<f64> {
    let curve = soft_ecc(grid, coeffs, params, 1)?;
    Ok(curve.values().iter().zip(upstream).map(|(v, w)| v * w).sum())
}

fn max_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

/// Numerical gradients of `sum_j upstream[j] * chi(tau_j)` as
/// `(d_values, d_tau, d_u)`.
pub fn numeric_gradients(
    grid: &ScalarGrid,
    coeffs: &CoefficientGrid,
    params: &SoftEccParams,
    upstream: &[f64],
    step: f64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let central = |plus: f64, minus: f64| (plus - minus) / (2.0 * step);

    let mut values = grid.values().to_vec();
    let mut d_values = Vec::with_capacity(values.len());
    for p in 0..values.len() {
        let orig = values[p];
        values[p] = orig + step;
        let plus = loss(&ScalarGrid::new(grid.dims().as_slice(), values.clone())?, coeffs, params, upstream)?;
        values[p] = orig - step;
        let minus = loss(&ScalarGrid::new(grid.dims().as_slice(), values.clone())?, coeffs, params, upstream)?;
        values[p] = orig;
        d_values.push(central(plus, minus));
    }

    let taus = params.taus();
    let mut d_tau = Vec::with_capacity(taus.len());
    for j in 0..taus.len() {
        let t = taus.as_slice()[j];
        let plus = loss(grid, coeffs, &params.with_taus(taus.with_replaced(j, t + step)?), upstream)?;
        let minus = loss(grid, coeffs, &params.with_taus(taus.with_replaced(j, t - step)?), upstream)?;
        d_tau.push(central(plus, minus));
    }

    let u = params.direction();
    let mut d_u = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let mut v = u.to_vec();
        v[i] = u[i] + step;
        let plus = loss(grid, coeffs, &params.with_direction(reparametrize_direction(&v)?)?, upstream)?;
        v[i] = u[i] - step;
        let minus = loss(grid, coeffs, &params.with_direction(reparametrize_direction(&v)?)?, upstream)?;
        d_u.push(central(plus, minus));
    }
    Ok((d_values, d_tau, d_u))
}

pub fn gradcheck(
    grid: &ScalarGrid,
    coeffs: &CoefficientGrid,
    params: &SoftEccParams,
    upstream: &[f64],
    step: f64,
) -> Result<GradcheckReport> {
    let analytic = soft_ecc_backward(grid, coeffs, params, upstream, 1)?;
    let (d_values, d_tau, d_u) = numeric_gradients(grid, coeffs, params, upstream, step)?;
    let tangency = analytic
        .d_u
        .iter()
        .zip(params.direction())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .abs();
    Ok(GradcheckReport {
        lambda: params.lambda(),
        alpha: params.alpha(),
        direction: params.direction().to_vec(),
        step,
        max_rel_err_values: max_error(&analytic.d_values, &d_values),
        max_rel_err_tau: max_error(&analytic.d_tau, &d_tau),
        max_rel_err_direction: max_error(&analytic.d_u, &d_u),
        tangency,
    })
}
