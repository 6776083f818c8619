//! Whole-grid evaluation for one fold and one feature ranking.
//!
//! Produces the same predictions as fitting [`MultiLabelModel`] once per grid
//! point, but shares work across points: ridge systems are cut out of one Gram
//! matrix, nearest-neighbour distances grow column by column as the feature
//! prefix lengthens, and SVM duals are warm-started along the C grid.
//!
//! [`MultiLabelModel`]: crate::classify::MultiLabelModel

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::classify::mlknn::from_neighbours;
use crate::classify::ridge::solve_penalized;
use crate::classify::svm::SvmProblem;
use crate::classify::{Family, HyperGrid, LinearSvm, ModelKind, Prediction, SvmParams, Wrapper, THRESHOLD};
use crate::error::{Error, Result};

/// Column-major view of the selected features.
pub(crate) struct Columns {
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

impl Columns {
    pub fn select(train_x: &[Vec<f64>], test_x: &[Vec<f64>], features: &[usize]) -> Self {
        let col = |x: &[Vec<f64>], f: usize| x.iter().map(|r| r[f]).collect::<Vec<f64>>();
        Self {
            train: features.iter().map(|&f| col(train_x, f)).collect(),
            test: features.iter().map(|&f| col(test_x, f)).collect(),
        }
    }

    fn n_train(&self) -> usize {
        self.train.first().map_or(0, Vec::len)
    }

    fn n_test(&self) -> usize {
        self.test.first().map_or(0, Vec::len)
    }

    fn train_rows(&self, m: usize) -> Vec<f64> {
        let n = self.n_train();
        let mut out = Vec::with_capacity(n * m);
        for i in 0..n {
            out.extend(self.train[..m].iter().map(|c| c[i]));
        }
        out
    }
}

/// Receives `(model, feature count, parameter index, prediction)`.
pub(crate) type Sink<'a> = dyn FnMut(ModelKind, usize, usize, Result<Prediction>) + 'a;

fn bit(b: bool) -> f64 {
    f64::from(u8::from(b))
}

/// Every grid point of `models` over the feature prefixes in `counts`.
pub(crate) fn evaluate_grid(
    cols: &Columns,
    train_y: &[Vec<bool>],
    counts: &[usize],
    models: &[ModelKind],
    grid: &HyperGrid,
    sink: &mut Sink<'_>,
) {
    let has = |f: Family, w: Option<Wrapper>| models.contains(&ModelKind::new(f, w));
    for w in [Wrapper::Br, Wrapper::Cc] {
        if has(Family::Rr, Some(w)) {
            ridge_grid(cols, train_y, counts, &grid.lambda, w, sink);
        }
    }
    let knn_br = has(Family::Knn, Some(Wrapper::Br));
    let knn_cc = has(Family::Knn, Some(Wrapper::Cc));
    let mlknn = has(Family::Mlknn, None);
    if knn_br || knn_cc || mlknn {
        neighbour_grid(cols, train_y, counts, grid, [knn_br, knn_cc, mlknn], sink);
    }
    for w in [Wrapper::Br, Wrapper::Cc] {
        if has(Family::Svm, Some(w)) {
            svm_grid(cols, train_y, counts, &grid.svm_c, w, sink);
        }
    }
}

fn ridge_grid(cols: &Columns, y: &[Vec<bool>], counts: &[usize], lambdas: &[f64], w: Wrapper, sink: &mut Sink<'_>) {
    let kind = ModelKind::new(Family::Rr, Some(w));
    let n = cols.n_train();
    let mm = cols.train.len();
    let nl = y.first().map_or(0, Vec::len);
    // Design columns: intercept, features, then labels as 0/1.
    let mut z: Vec<Vec<f64>> = vec![vec![1.0; n]];
    z.extend(cols.train.iter().cloned());
    z.extend((0..nl).map(|l| y.iter().map(|r| bit(r[l])).collect()));
    let p = z.len();
    let mut gram = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let s: f64 = z[a].iter().zip(&z[b]).map(|(u, v)| u * v).sum();
            gram[(a, b)] = s;
            gram[(b, a)] = s;
        }
    }
    let label_col = |l: usize| 1 + mm + l;
    for &m in counts {
        for (pi, &lambda) in lambdas.iter().enumerate() {
            let fit: Result<Vec<DVector<f64>>> = (0..nl)
                .map(|l| {
                    let mut idx: Vec<usize> = (0..=m).collect();
                    if w == Wrapper::Cc {
                        idx.extend((0..l).map(label_col));
                    }
                    let a = gram.select_rows(&idx).select_columns(&idx);
                    let b = DVector::from_iterator(idx.len(), idx.iter().map(|&i| gram[(i, label_col(l))]));
                    solve_penalized(&a, &b, lambda)
                        .map_err(|e| Error::InvalidParameter(format!("label {}: {e}", l + 1)))
                })
                .collect();
            let pred = fit.map(|betas| {
                let nt = cols.n_test();
                let mut bits = vec![Vec::with_capacity(nl); nt];
                let mut conf = vec![Vec::with_capacity(nl); nt];
                for i in 0..nt {
                    for (l, beta) in betas.iter().enumerate() {
                        let mut s = beta[0] + (0..m).map(|c| beta[c + 1] * cols.test[c][i]).sum::<f64>();
                        if w == Wrapper::Cc {
                            s += (0..l).map(|k| beta[m + 1 + k] * bit(bits[i][k])).sum::<f64>();
                        }
                        bits[i].push(s >= THRESHOLD);
                        conf[i].push(s);
                    }
                }
                Prediction {
                    bits,
                    confidence: Some(conf),
                }
            });
            sink(kind, m, pi, pred);
        }
    }
}

fn by_dist(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// The `k` smallest `(distance, index)` pairs of `row`, sorted.
fn smallest(row: &[f64], k: usize) -> Vec<(f64, usize)> {
    let mut d: Vec<(f64, usize)> = row.iter().copied().zip(0..).collect();
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, by_dist);
        d.truncate(k);
    }
    d.sort_by(by_dist);
    d
}

const PARTIAL: usize = 256;

/// Chain neighbours of one query: the `k` nearest rows by feature distance
/// plus the squared differences between the query's bits and each row's
/// first `bits.len()` labels, accumulated in that order.
fn chain_neighbours(sorted: &[(f64, usize)], y: &[Vec<bool>], bits: &[bool], k: usize) -> Option<Vec<usize>> {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for &(base, j) in sorted {
        if best.len() == k && base > best[k - 1].0 {
            return Some(best.into_iter().map(|b| b.1).collect());
        }
        let mut total = base;
        for (l, &b) in bits.iter().enumerate() {
            let d = bit(b) - bit(y[j][l]);
            total += d * d;
        }
        let cand = (total, j);
        if best.len() < k || by_dist(&cand, &best[k - 1]) == Ordering::Less {
            let pos = best.partition_point(|e| by_dist(e, &cand) == Ordering::Less);
            best.insert(pos, cand);
            best.truncate(k);
        }
    }
    // Exhausted the candidates: only conclusive if they were all the rows.
    (sorted.len() == y.len()).then(|| best.into_iter().map(|b| b.1).collect())
}

fn neighbour_grid(
    cols: &Columns,
    y: &[Vec<bool>],
    counts: &[usize],
    grid: &HyperGrid,
    [knn_br, knn_cc, mlknn]: [bool; 3],
    sink: &mut Sink<'_>,
) {
    let n = cols.n_train();
    let nt = cols.n_test();
    let nl = y.first().map_or(0, Vec::len);
    let mut dte = vec![0.0f64; nt * n];
    let mut dtr = if mlknn { vec![0.0f64; n * n] } else { Vec::new() };
    let mut done = 0;
    let kmax = grid.knn_k.iter().copied().max().unwrap_or(0).max(grid.mlknn_k);
    let too_many = |k: usize| Error::InvalidParameter(format!("K = {k} with {n} training rows"));

    for &m in counts {
        for c in done..m {
            let (tr, te) = (&cols.train[c], &cols.test[c]);
            for i in 0..nt {
                let q = te[i];
                for (d, &p) in dte[i * n..(i + 1) * n].iter_mut().zip(tr) {
                    *d += (p - q) * (p - q);
                }
            }
            if mlknn {
                // Whole rows rather than the upper triangle: twice the
                // arithmetic but contiguous writes.
                for i in 0..n {
                    let q = tr[i];
                    for (d, &p) in dtr[i * n..(i + 1) * n].iter_mut().zip(tr) {
                        *d += (p - q) * (p - q);
                    }
                }
            }
        }
        done = m;

        let nearest: Vec<Vec<(f64, usize)>> = (0..nt)
            .map(|i| smallest(&dte[i * n..(i + 1) * n], kmax.min(n).max(1)))
            .collect();

        if knn_br {
            let kind = ModelKind::new(Family::Knn, Some(Wrapper::Br));
            for (pi, &k) in grid.knn_k.iter().enumerate() {
                if k == 0 || k > n {
                    sink(kind, m, pi, Err(too_many(k)));
                    continue;
                }
                let mut bits = Vec::with_capacity(nt);
                let mut conf = Vec::with_capacity(nt);
                for nn in &nearest {
                    let s: Vec<f64> = (0..nl)
                        .map(|l| nn[..k].iter().filter(|e| y[e.1][l]).count() as f64 / k as f64)
                        .collect();
                    bits.push(s.iter().map(|&v| v >= THRESHOLD).collect());
                    conf.push(s);
                }
                sink(kind, m, pi, Ok(Prediction { bits, confidence: Some(conf) }));
            }
        }

        if knn_cc {
            let kind = ModelKind::new(Family::Knn, Some(Wrapper::Cc));
            let partial: Vec<Vec<(f64, usize)>> = (0..nt)
                .map(|i| smallest(&dte[i * n..(i + 1) * n], PARTIAL.min(n).max(1)))
                .collect();
            let mut full: Vec<Option<Vec<(f64, usize)>>> = vec![None; nt];
            for (pi, &k) in grid.knn_k.iter().enumerate() {
                if k == 0 || k > n {
                    sink(kind, m, pi, Err(too_many(k)));
                    continue;
                }
                let mut bits = Vec::with_capacity(nt);
                let mut conf = Vec::with_capacity(nt);
                for i in 0..nt {
                    let mut b: Vec<bool> = Vec::with_capacity(nl);
                    let mut s: Vec<f64> = Vec::with_capacity(nl);
                    for l in 0..nl {
                        let nn = match chain_neighbours(&partial[i], y, &b, k) {
                            Some(nn) => nn,
                            None => {
                                let all = full[i].get_or_insert_with(|| smallest(&dte[i * n..(i + 1) * n], n));
                                chain_neighbours(all, y, &b, k).expect("all rows considered")
                            }
                        };
                        let v = nn.iter().filter(|&&j| y[j][l]).count() as f64 / k as f64;
                        b.push(v >= THRESHOLD);
                        s.push(v);
                    }
                    bits.push(b);
                    conf.push(s);
                }
                sink(kind, m, pi, Ok(Prediction { bits, confidence: Some(conf) }));
            }
        }

        if mlknn {
            let kind = ModelKind::new(Family::Mlknn, None);
            let k = grid.mlknn_k;
            if k == 0 || k >= n {
                sink(kind, m, 0, Err(too_many(k)));
                continue;
            }
            let neighbours: Vec<Vec<usize>> = (0..n)
                .map(|i| {
                    let mut nn: Vec<usize> = smallest(&dtr[i * n..(i + 1) * n], k + 1).into_iter().map(|e| e.1).collect();
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
            let model = from_neighbours(Vec::new(), y.to_vec(), k, 1.0, &neighbours);
            let mut bits = Vec::with_capacity(nt);
            let mut conf = Vec::with_capacity(nt);
            for nn in &nearest {
                let idx: Vec<usize> = nn[..k].iter().map(|e| e.1).collect();
                let p = model.posterior_from_neighbours(&idx);
                bits.push(p.iter().map(|&v| v >= 0.5).collect());
                conf.push(p);
            }
            sink(kind, m, 0, Ok(Prediction { bits, confidence: Some(conf) }));
        }
    }
}

fn svm_grid(cols: &Columns, y: &[Vec<bool>], counts: &[usize], cs: &[f64], w: Wrapper, sink: &mut Sink<'_>) {
    let kind = ModelKind::new(Family::Svm, Some(w));
    let n = cols.n_train();
    let nt = cols.n_test();
    let nl = y.first().map_or(0, Vec::len);
    let mut order: Vec<usize> = (0..cs.len()).collect();
    order.sort_by(|&a, &b| cs[a].total_cmp(&cs[b]).then(a.cmp(&b)));
    let targets: Vec<Vec<f64>> = (0..nl)
        .map(|l| y.iter().map(|r| if r[l] { 1.0 } else { -1.0 }).collect())
        .collect();
    // Warm starts: each C starts from the next smaller C of the same label;
    // the smallest from its own solution at the previous prefix.
    let mut warm: Vec<Vec<f64>> = vec![Vec::new(); nl];

    for &m in counts {
        let base = cols.train_rows(m);
        // models[ci][l]
        let mut models: Vec<Vec<LinearSvm>> = vec![Vec::with_capacity(nl); cs.len()];
        for l in 0..nl {
            let rows: Vec<f64>;
            let dim;
            let data: &[f64] = if w == Wrapper::Cc && l > 0 {
                dim = m + l;
                let mut r = Vec::with_capacity(n * dim);
                for i in 0..n {
                    r.extend_from_slice(&base[i * m..(i + 1) * m]);
                    r.extend(y[i][..l].iter().map(|&b| bit(b)));
                }
                rows = r;
                &rows
            } else {
                dim = m;
                &base
            };
            let problem = SvmProblem {
                rows: data,
                dim,
                y: &targets[l],
                bias: true,
            };
            let mut start = std::mem::take(&mut warm[l]);
            for (k, &ci) in order.iter().enumerate() {
                let fit = problem.solve(&SvmParams::new(cs[ci]), start);
                if k == 0 {
                    warm[l] = fit.alpha.clone();
                }
                start = fit.alpha;
                models[ci].push(fit.model);
            }
        }
        for (ci, ms) in models.iter().enumerate() {
            let mut bits = Vec::with_capacity(nt);
            for i in 0..nt {
                let row: Vec<f64> = (0..m).map(|c| cols.test[c][i]).collect();
                let mut b: Vec<bool> = Vec::with_capacity(nl);
                for model in ms {
                    let v = if w == Wrapper::Cc {
                        let mut r = row.clone();
                        r.extend(b.iter().map(|&x| bit(x)));
                        model.predict(&r)
                    } else {
                        model.predict(&row)
                    };
                    b.push(v);
                }
                bits.push(b);
            }
            sink(kind, m, ci, Ok(Prediction { bits, confidence: None }));
        }
    }
}
