//! Penalized least squares with an unpenalized intercept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub lambda: f64,
}

impl RidgeModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Design matrix with a leading column of ones.
pub(crate) fn design(x: &[Vec<f64>]) -> DMatrix<f64> {
    let d = x.first().map_or(0, Vec::len);
    DMatrix::from_fn(x.len(), d + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] })
}

/// Solves `(A + lambda * P) beta = b` where `P` is the identity with the
/// intercept entry zeroed. Solutions whose relative residual exceeds
/// `1e-8` are rejected as rank deficient, as are
/// systems with a vanishing Cholesky pivot.
pub(crate) fn solve_penalized(gram: &DMatrix<f64>, rhs: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let mut a = gram.clone();
    for i in 1..a.nrows() {
        a[(i, i)] += lambda;
    }
    let singular = || Error::NumericalRank(format!("ridge system singular at lambda = {lambda}"));
    let ch = a.clone().cholesky().ok_or_else(singular)?;
    // A pivot that lost nearly all of its diagonal mass means a dependent column.
    let l = ch.l_dirty();
    if (0..a.nrows()).any(|i| l[(i, i)] * l[(i, i)] <= 1e-12 * a[(i, i)].abs()) {
        return Err(singular());
    }
    let beta = ch.solve(rhs);
    let resid = (&a * &beta - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    if !(resid <= 1e-8) {
        return Err(singular());
    }
    Ok(beta)
}

/// Relative residual of the penalized normal equations.
pub fn normal_equation_residual(x: &[Vec<f64>], y: &[bool], model: &RidgeModel) -> f64 {
    let a = design(x);
    let t = DVector::from_iterator(y.len(), y.iter().map(|&b| f64::from(u8::from(b))));
    let mut beta = vec![model.intercept];
    beta.extend(&model.coef);
    let beta = DVector::from_vec(beta);
    let at = a.transpose();
    let mut lhs = &at * (&a * &beta);
    for i in 1..beta.len() {
        lhs[i] += model.lambda * beta[i];
    }
    let rhs = at * t;
    (lhs - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE)
}

pub fn train_ridge(x: &[Vec<f64>], y: &[bool], lambda: f64) -> Result<RidgeModel> {
    if x.is_empty() {
        return Err(Error::EmptyInput("ridge on an empty training set"));
    }
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} rows vs {} targets", x.len(), y.len())));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let a = design(x);
    let t = DVector::from_iterator(y.len(), y.iter().map(|&b| f64::from(u8::from(b))));
    let at = a.transpose();
    let beta = solve_penalized(&(&at * &a), &(at * t), lambda)?;
    Ok(RidgeModel {
        intercept: beta[0],
        coef: beta.iter().skip(1).copied().collect(),
        lambda,
    })
}
