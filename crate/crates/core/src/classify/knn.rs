//! Plain k-nearest-neighbour voting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Indices of the `k` training rows closest to `query`, nearest first;
/// equal distances keep the lower index first.
pub fn nearest(train: &[Vec<f64>], query: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > train.len() {
        return Err(Error::InvalidParameter(format!(
            "K = {k} with {} training rows",
            train.len()
        )));
    }
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, r)| (sq_dist(r, query), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, cmp);
        d.truncate(k);
    }
    d.sort_by(cmp);
    Ok(d.into_iter().map(|(_, i)| i).collect())
}

/// Fraction of the `k` nearest neighbours carrying each label.
pub fn knn_scores(train_x: &[Vec<f64>], train_y: &[Vec<bool>], query: &[f64], k: usize) -> Result<Vec<f64>> {
    let nn = nearest(train_x, query, k)?;
    let n = train_y.first().map_or(0, Vec::len);
    Ok((0..n)
        .map(|l| nn.iter().filter(|&&i| train_y[i][l]).count() as f64 / k as f64)
        .collect())
}

/// Single-label voter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    pub k: usize,
}

impl KnnModel {
    pub fn fit(x: &[Vec<f64>], y: &[bool], k: usize) -> Result<Self> {
        if k == 0 || k > x.len() {
            return Err(Error::InvalidParameter(format!("K = {k} with {} training rows", x.len())));
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            k,
        })
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        let nn = nearest(&self.x, query, self.k).expect("k checked at fit");
        nn.iter().filter(|&&i| self.y[i]).count() as f64 / self.k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_neighbour() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0]];
        let y = vec![vec![true, false], vec![false, true], vec![true, true]];
        assert_eq!(knn_scores(&x, &y, &[1.0, 1.0], 1).unwrap(), vec![0.0, 1.0]);
        assert!(knn_scores(&x, &y, &[1.0, 1.0], 4).is_err());
        assert!(knn_scores(&x, &y, &[1.0, 1.0], 0).is_err());
    }

    #[test]
    fn half_vote_and_ties() {
        // Four equidistant neighbours; a fifth farther away.
        let x = vec![vec![1.0], vec![-1.0], vec![1.0], vec![-1.0], vec![9.0]];
        let y = vec![vec![true], vec![true], vec![false], vec![false], vec![true]];
        let s = knn_scores(&x, &y, &[0.0], 4).unwrap();
        assert_eq!(s, vec![0.5]);
        assert!(s[0] >= 0.5);
        // With K = 2 the tie keeps indices 0 and 1.
        assert_eq!(nearest(&x, &[0.0], 2).unwrap(), vec![0, 1]);
        let m = KnnModel::fit(&x, &[true, true, false, false, true], 4).unwrap();
        assert_eq!(m.score(&[0.0]), 0.5);
    }
}
