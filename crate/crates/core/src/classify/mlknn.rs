//! Multilabel k-nearest neighbours with Bayesian neighbour-count posteriors.

use serde::{Deserialize, Serialize};

use super::knn::nearest;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlknnModel {
    pub k: usize,
    pub s: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<bool>>,
    /// Prior probability of each label.
    pub prior: Vec<f64>,
    /// `like1[l][c]`: P(c neighbours carry l | instance carries l).
    pub like1: Vec<Vec<f64>>,
    /// `like0[l][c]`: P(c neighbours carry l | instance lacks l).
    pub like0: Vec<Vec<f64>>,
}

/// Builds the model from the neighbour lists of each training row
/// (excluding the row itself).
pub(crate) fn from_neighbours(
    x: Vec<Vec<f64>>,
    y: Vec<Vec<bool>>,
    k: usize,
    s: f64,
    neighbours: &[Vec<usize>],
) -> MlknnModel {
    let m = y.len() as f64;
    let n = y.first().map_or(0, Vec::len);
    let mut prior = Vec::with_capacity(n);
    let mut like1 = Vec::with_capacity(n);
    let mut like0 = Vec::with_capacity(n);
    for l in 0..n {
        let pos = y.iter().filter(|r| r[l]).count() as f64;
        prior.push((s + pos) / (2.0 * s + m));
        let mut c1 = vec![0.0; k + 1];
        let mut c0 = vec![0.0; k + 1];
        for (i, nn) in neighbours.iter().enumerate() {
            let c = nn.iter().filter(|&&j| y[j][l]).count();
            if y[i][l] {
                c1[c] += 1.0;
            } else {
                c0[c] += 1.0;
            }
        }
        let (t1, t0): (f64, f64) = (c1.iter().sum(), c0.iter().sum());
        let denom = s * (k + 1) as f64;
        like1.push(c1.iter().map(|c| (s + c) / (denom + t1)).collect());
        like0.push(c0.iter().map(|c| (s + c) / (denom + t0)).collect());
    }
    MlknnModel {
        k,
        s,
        x,
        y,
        prior,
        like1,
        like0,
    }
}

impl MlknnModel {
    pub fn train(x: &[Vec<f64>], y: &[Vec<bool>], k: usize, s: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch(format!("{} rows vs {} label rows", x.len(), y.len())));
        }
        if k == 0 || k >= x.len() {
            return Err(Error::InvalidParameter(format!(
                "MLKNN k = {k} needs more than k training rows, got {}",
                x.len()
            )));
        }
        let neighbours: Vec<Vec<usize>> = (0..x.len())
            .map(|i| {
                let mut nn = nearest(x, &x[i], k + 1).expect("k + 1 <= rows");
                // Leave the row itself out; a duplicate row may precede it.
                match nn.iter().position(|&j| j == i) {
                    Some(p) => {
                        nn.remove(p);
                    }
                    None => {
                        nn.pop();
                    }
                }
                nn
            })
            .collect();
        Ok(from_neighbours(x.to_vec(), y.to_vec(), k, s, &neighbours))
    }

    /// Posterior of each label given how many of the neighbours carry it.
    pub fn posterior_from_neighbours(&self, nn: &[usize]) -> Vec<f64> {
        (0..self.prior.len())
            .map(|l| {
                let c = nn.iter().filter(|&&j| self.y[j][l]).count();
                let p1 = self.prior[l] * self.like1[l][c];
                let p0 = (1.0 - self.prior[l]) * self.like0[l][c];
                p1 / (p1 + p0)
            })
            .collect()
    }

    pub fn posterior(&self, query: &[f64]) -> Vec<f64> {
        let nn = nearest(&self.x, query, self.k).expect("k checked at train");
        self.posterior_from_neighbours(&nn)
    }

    pub fn predict(&self, query: &[f64]) -> (Vec<bool>, Vec<f64>) {
        let p = self.posterior(query);
        (p.iter().map(|&v| v >= 0.5).collect(), p)
    }
}
