//! Linear soft-margin SVM (hinge loss) by dual coordinate descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub w: Vec<f64>,
    /// Weight of the constant feature; 0 when trained without bias.
    pub b: f64,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.b + self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Sign of the decision value, zero counted as positive.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Append a constant 1 feature (its weight is regularized like the rest).
    pub bias: bool,
    /// Relative duality-gap stopping tolerance.
    pub tol: f64,
    /// Cap on the work, in full passes over the data; a pass over a shrunk
    /// active set counts fractionally.
    pub max_epochs: usize,
    pub seed: u64,
}

impl SvmParams {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            bias: true,
            tol: 1e-3,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: LinearSvm,
    pub alpha: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub epochs: usize,
    pub converged: bool,
}

impl SvmFit {
    pub fn relative_gap(&self) -> f64 {
        (self.primal - self.dual) / self.primal.abs().max(f64::MIN_POSITIVE)
    }
}

/// Dot product with four independent accumulators so the compiler can
/// vectorize it.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Row-major training data with labels as +/-1.
pub(crate) struct SvmProblem<'a> {
    pub rows: &'a [f64],
    pub dim: usize,
    pub y: &'a [f64],
    pub bias: bool,
}

impl SvmProblem<'_> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn dot(&self, w: &[f64], i: usize) -> f64 {
        let s = dot(self.row(i), w);
        if self.bias {
            s + w[self.dim]
        } else {
            s
        }
    }

    fn axpy(&self, w: &mut [f64], i: usize, a: f64) {
        for (wj, xj) in w.iter_mut().zip(self.row(i)) {
            *wj += a * xj;
        }
        if self.bias {
            w[self.dim] += a;
        }
    }

    fn objectives(&self, w: &[f64], alpha: &[f64], c: f64) -> (f64, f64) {
        let ww: f64 = w.iter().map(|v| v * v).sum();
        let hinge: f64 = (0..self.n())
            .map(|i| (1.0 - self.y[i] * self.dot(w, i)).max(0.0))
            .sum();
        let sa: f64 = alpha.iter().sum();
        (0.5 * ww + c * hinge, sa - 0.5 * ww)
    }

    /// Dual coordinate descent from `alpha` (clipped to `[0, C]`).
    pub fn solve(&self, params: &SvmParams, mut alpha: Vec<f64>) -> SvmFit {
        let n = self.n();
        let c = params.c;
        let wlen = self.dim + usize::from(self.bias);
        alpha.resize(n, 0.0);
        alpha.iter_mut().for_each(|a| *a = a.clamp(0.0, c));
        let mut w = vec![0.0; wlen];
        for i in 0..n {
            if alpha[i] != 0.0 {
                self.axpy(&mut w, i, alpha[i] * self.y[i]);
            }
        }
        let qii: Vec<f64> = (0..n)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>() + f64::from(u8::from(self.bias)))
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let (mut primal, mut dual) = self.objectives(&w, &alpha, c);
        let mut converged = n == 0 || primal - dual <= params.tol * primal.abs();
        let mut epochs = 0;
        // Shrinking: a variable at a bound whose gradient points outward by
        // more than the last epoch's spread leaves the active set. Once the
        // active set is optimal to `eps`, everything is re-activated, the
        // gap is checked and `eps` tightened.
        let mut active = n;
        let mut eps = 0.1;
        let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut since_check = 0;
        let budget = params.max_epochs.saturating_mul(n);
        let mut work = 0usize;
        while !converged && work < budget {
            order[..active].shuffle(&mut rng);
            let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut s = 0;
            while s < active {
                let i = order[s];
                let g = self.y[i] * self.dot(&w, i) - 1.0;
                let pg = if alpha[i] == 0.0 {
                    if g > pg_max_old {
                        active -= 1;
                        order.swap(s, active);
                        continue;
                    }
                    g.min(0.0)
                } else if alpha[i] == c {
                    if g < pg_min_old {
                        active -= 1;
                        order.swap(s, active);
                        continue;
                    }
                    g.max(0.0)
                } else {
                    g
                };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg != 0.0 && qii[i] > 0.0 {
                    let old = alpha[i];
                    alpha[i] = (old - g / qii[i]).clamp(0.0, c);
                    self.axpy(&mut w, i, (alpha[i] - old) * self.y[i]);
                }
                s += 1;
            }
            epochs += 1;
            work += active;
            since_check += active;
            let settled = pg_max - pg_min <= eps;
            // A gap check costs a full pass; at most one per five passes of work.
            if settled && active == n || since_check >= 5 * n || work >= budget {
                (primal, dual) = self.objectives(&w, &alpha, c);
                converged = primal - dual <= params.tol * primal.abs();
                since_check = 0;
            }
            if settled {
                if active == n {
                    eps *= 0.1;
                }
                active = n;
                pg_max_old = f64::INFINITY;
                pg_min_old = f64::NEG_INFINITY;
            } else {
                pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
                pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
            }
        }
        if !converged {
            log::warn!("SVM stopped at {epochs} epochs, relative gap {:.2e}", (primal - dual) / primal.abs());
        }
        let b = if self.bias { w[self.dim] } else { 0.0 };
        w.truncate(self.dim);
        SvmFit {
            model: LinearSvm { w, b },
            alpha,
            primal,
            dual,
            epochs,
            converged,
        }
    }
}

pub fn train_svm(x: &[Vec<f64>], y: &[bool], params: &SvmParams) -> Result<SvmFit> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} rows vs {} targets", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("SVM on an empty training set"));
    }
    if !(params.c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be > 0, got {}", params.c)));
    }
    let dim = x[0].len();
    let rows: Vec<f64> = x.iter().flatten().copied().collect();
    let ys: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
    let problem = SvmProblem {
        rows: &rows,
        dim,
        y: &ys,
        bias: params.bias,
    };
    Ok(problem.solve(params, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hinge(m: &LinearSvm, x: &[Vec<f64>], y: &[bool]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(r, &t)| (1.0 - if t { 1.0 } else { -1.0 } * m.decision(r)).max(0.0))
            .sum()
    }

    #[test]
    fn separable() {
        let x = vec![vec![2.0, 2.0], vec![3.0, 1.0], vec![-2.0, -1.0], vec![-1.0, -3.0]];
        let y = [true, true, false, false];
        let fit = train_svm(&x, &y, &SvmParams::new(10.0)).unwrap();
        assert!(fit.converged);
        for (r, &t) in x.iter().zip(&y) {
            assert_eq!(fit.model.predict(r), t);
        }
        assert!(fit.relative_gap() <= SvmParams::new(10.0).tol);
    }

    #[test]
    fn small_c_tolerates_violations() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin() + (i % 2) as f64 * 0.6]).collect();
        let y: Vec<bool> = (0..40).map(|i| i % 2 == 1).collect();
        let lo = train_svm(&x, &y, &SvmParams::new(1e-3)).unwrap();
        let hi = train_svm(&x, &y, &SvmParams::new(100.0)).unwrap();
        assert!(hinge(&lo.model, &x, &y) >= hinge(&hi.model, &x, &y));
    }

    #[test]
    fn matches_primal_grid() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 0.5], vec![-1.0, -0.5], vec![0.5, -2.0]];
        let y = [true, true, false, false];
        let params = SvmParams {
            bias: false,
            tol: 1e-9,
            max_epochs: 100_000,
            ..SvmParams::new(0.5)
        };
        let fit = train_svm(&x, &y, &params).unwrap();
        let primal = |w: [f64; 2]| {
            let m = LinearSvm { w: w.to_vec(), b: 0.0 };
            0.5 * (w[0] * w[0] + w[1] * w[1]) + 0.5 * hinge(&m, &x, &y)
        };
        let mut best = ([0.0; 2], f64::INFINITY);
        let step = 0.005;
        for a in 0..=600 {
            for b in 0..=600 {
                let w = [-1.5 + a as f64 * step, -1.5 + b as f64 * step];
                let p = primal(w);
                if p < best.1 {
                    best = (w, p);
                }
            }
        }
        for k in 0..2 {
            assert!((fit.model.w[k] - best.0[k]).abs() < 1e-2, "{:?} vs {:?}", fit.model.w, best.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(train_svm(&[vec![1.0]], &[true], &SvmParams::new(0.0)).is_err());
        assert!(train_svm(&[], &[], &SvmParams::new(1.0)).is_err());
    }
}
