//! Multilabel feature ranking on floor-discretized columns.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "MLMIM")]
    Mlmim,
    #[serde(rename = "MLJMI")]
    Mljmi,
    #[serde(rename = "MLMRMR")]
    Mlmrmr,
    #[serde(rename = "MIFS")]
    Mifs,
    #[serde(rename = "F-Score")]
    FScore,
    #[serde(rename = "RFS")]
    Rfs,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Mlmim,
        Method::Mljmi,
        Method::Mlmrmr,
        Method::Mifs,
        Method::FScore,
        Method::Rfs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mlmim => "MLMIM",
            Method::Mljmi => "MLJMI",
            Method::Mlmrmr => "MLMRMR",
            Method::Mifs => "MIFS",
            Method::FScore => "F-Score",
            Method::Rfs => "RFS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown selection method `{s}`")))
    }
}

/// Floor codes of a real column.
pub fn discretize(column: &[f64]) -> Vec<i64> {
    column.iter().map(|v| v.floor() as i64).collect()
}

/// Column re-encoded to dense codes `0..card`.
#[derive(Debug, Clone)]
struct Coded {
    codes: Vec<u32>,
    card: usize,
}

impl Coded {
    fn from_ints(x: &[i64]) -> Self {
        let mut uniq: Vec<i64> = x.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let codes = x
            .iter()
            .map(|v| uniq.binary_search(v).unwrap() as u32)
            .collect();
        Self {
            codes,
            card: uniq.len(),
        }
    }

    fn from_bools(y: impl Iterator<Item = bool>) -> Self {
        Self {
            codes: y.map(u32::from).collect(),
            card: 2,
        }
    }

    fn joint(&self, other: &Coded) -> Coded {
        let n = self.codes.len();
        let cells = self.card.saturating_mul(other.card);
        let mut codes = Vec::with_capacity(n);
        let mut next = 0u32;
        if cells <= 4 * n + 1024 {
            let mut map = vec![u32::MAX; cells];
            for (&a, &b) in self.codes.iter().zip(&other.codes) {
                let slot = &mut map[a as usize * other.card + b as usize];
                if *slot == u32::MAX {
                    *slot = next;
                    next += 1;
                }
                codes.push(*slot);
            }
        } else {
            let mut map: HashMap<u64, u32> = HashMap::with_capacity(n);
            for (&a, &b) in self.codes.iter().zip(&other.codes) {
                let key = a as u64 * other.card as u64 + b as u64;
                let id = *map.entry(key).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                codes.push(id);
            }
        }
        Coded {
            codes,
            card: next as usize,
        }
    }

    fn counts(&self) -> Vec<u32> {
        let mut c = vec![0u32; self.card];
        for &k in &self.codes {
            c[k as usize] += 1;
        }
        c
    }

    fn entropy(&self) -> f64 {
        entropy_of_counts(self.counts(), self.codes.len())
    }
}

/// Base-2 plug-in entropy. Counts are summed in sorted order so equal count
/// multisets give bit-identical results.
fn entropy_of_counts(mut counts: Vec<u32>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    counts.retain(|&c| c > 0);
    counts.sort_unstable();
    let nf = n as f64;
    let s: f64 = counts.iter().map(|&c| c as f64 * (c as f64).log2()).sum();
    (nf.log2() - s / nf).max(0.0)
}

pub fn entropy(x: &[i64]) -> f64 {
    Coded::from_ints(x).entropy()
}

fn mi_coded(a: &Coded, b: &Coded) -> f64 {
    let (ha, hb) = (a.entropy(), b.entropy());
    let hab = a.joint(b).entropy();
    (ha + hb - hab).clamp(0.0, ha.min(hb))
}

/// Plug-in mutual information in bits between two discrete columns.
pub fn mutual_information(x: &[i64], y: &[i64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "columns of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("mutual information of empty columns"));
    }
    Ok(mi_coded(&Coded::from_ints(x), &Coded::from_ints(y)))
}

/// Shared per-dataset state for the MI criteria.
struct MiContext {
    columns: Vec<Coded>,
    col_entropy: Vec<f64>,
    labels: Vec<Coded>,
    label_entropy: Vec<f64>,
}

impl MiContext {
    fn new(x: &[Vec<f64>], y: &[Vec<bool>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n_labels = y.first().map_or(0, Vec::len);
        let columns: Vec<Coded> = (0..d)
            .map(|f| Coded::from_ints(&discretize(&x.iter().map(|r| r[f]).collect::<Vec<_>>())))
            .collect();
        let col_entropy = columns.iter().map(Coded::entropy).collect();
        let labels: Vec<Coded> = (0..n_labels)
            .map(|l| Coded::from_bools(y.iter().map(|r| r[l])))
            .collect();
        let label_entropy = labels.iter().map(Coded::entropy).collect();
        Self {
            columns,
            col_entropy,
            labels,
            label_entropy,
        }
    }

    /// Sum over labels of I(g; y_l) for an arbitrary coded column `g`.
    fn label_mi_sum(&self, g: &Coded, hg: f64) -> f64 {
        let n = g.codes.len();
        let mut total = 0.0;
        let mut cells = vec![0u32; 2 * g.card];
        for (lab, &hy) in self.labels.iter().zip(&self.label_entropy) {
            cells.iter_mut().for_each(|c| *c = 0);
            for (&a, &b) in g.codes.iter().zip(&lab.codes) {
                cells[2 * a as usize + b as usize] += 1;
            }
            let hgy = entropy_of_counts(cells.clone(), n);
            total += (hg + hy - hgy).clamp(0.0, hg.min(hy));
        }
        total
    }

    fn relevance(&self, f: usize) -> f64 {
        self.label_mi_sum(&self.columns[f], self.col_entropy[f])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub method: Method,
    /// Column indices in rank order.
    pub features: Vec<usize>,
    pub names: Vec<String>,
    /// Criterion value at the time each feature was picked.
    pub scores: Vec<f64>,
    /// False when an iterative solver hit its cap.
    pub converged: bool,
}

impl FeatureRanking {
    pub fn top(&self, m: usize) -> &[usize] {
        &self.features[..m.min(self.features.len())]
    }
}

/// Higher score first; equal scores resolved by feature name.
fn better(a: (f64, &str), b: (f64, &str)) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1 < b.1,
    }
}

fn check_inputs(x: &[Vec<f64>], y: &[Vec<bool>], names: &[String], m: usize) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInput("feature ranking on an empty dataset"));
    }
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!("{} rows vs {} label rows", x.len(), y.len())));
    }
    let d = x[0].len();
    if names.len() != d {
        return Err(Error::ShapeMismatch(format!("{} names for {d} features", names.len())));
    }
    if m > d {
        return Err(Error::InvalidParameter(format!("cannot select {m} of {d} features")));
    }
    Ok(())
}

fn sort_by_score(scores: &[f64], names: &[String], m: usize) -> (Vec<usize>, Vec<f64>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| names[a].cmp(&names[b]))
    });
    order.truncate(m);
    let s = order.iter().map(|&f| scores[f]).collect();
    (order, s)
}

#[derive(Clone, Copy)]
enum Greedy {
    Jmi,
    Mrmr,
    Nmi,
}

fn greedy(ctx: &MiContext, names: &[String], m: usize, kind: Greedy) -> (Vec<usize>, Vec<f64>) {
    let d = ctx.columns.len();
    let rel: Vec<f64> = (0..d).map(|f| ctx.relevance(f)).collect();
    let mut acc = vec![0.0; d];
    let mut chosen = vec![false; d];
    let mut order = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    while order.len() < m {
        let k = order.len();
        let score = |f: usize| -> f64 {
            if k == 0 {
                return rel[f];
            }
            match kind {
                Greedy::Jmi => acc[f],
                Greedy::Mrmr | Greedy::Nmi => rel[f] - acc[f] / k as f64,
            }
        };
        let mut best: Option<(usize, f64)> = None;
        for f in (0..d).filter(|&f| !chosen[f]) {
            let s = score(f);
            if best.map_or(true, |(b, bs)| better((s, &names[f]), (bs, &names[b]))) {
                best = Some((f, s));
            }
        }
        let (pick, s) = best.expect("m <= d");
        chosen[pick] = true;
        order.push(pick);
        scores.push(s);
        if order.len() == m {
            break;
        }
        let sel = &ctx.columns[pick];
        let h_sel = ctx.col_entropy[pick];
        for f in (0..d).filter(|&f| !chosen[f]) {
            acc[f] += match kind {
                Greedy::Jmi => {
                    let j = ctx.columns[f].joint(sel);
                    let hj = j.entropy();
                    ctx.label_mi_sum(&j, hj)
                }
                Greedy::Mrmr => mi_coded(&ctx.columns[f], sel),
                Greedy::Nmi => {
                    let h = ctx.col_entropy[f].min(h_sel);
                    if h > 0.0 {
                        mi_coded(&ctx.columns[f], sel) / h
                    } else {
                        0.0
                    }
                }
            };
        }
    }
    (order, scores)
}

/// Fisher score per label summed over labels, on raw values.
fn fisher_scores(x: &[Vec<f64>], y: &[Vec<bool>]) -> Vec<f64> {
    let d = x[0].len();
    let n_labels = y[0].len();
    let mut out = vec![0.0; d];
    for l in 0..n_labels {
        let mut stats = vec![[0.0f64; 6]; d]; // n0, s0, q0, n1, s1, q1
        for (row, lab) in x.iter().zip(y) {
            let off = if lab[l] { 3 } else { 0 };
            for (st, &v) in stats.iter_mut().zip(row) {
                st[off] += 1.0;
                st[off + 1] += v;
                st[off + 2] += v * v;
            }
        }
        for (o, st) in out.iter_mut().zip(&stats) {
            let (n0, n1) = (st[0], st[3]);
            if n0 == 0.0 || n1 == 0.0 {
                continue;
            }
            let (m0, m1) = (st[1] / n0, st[4] / n1);
            let m = (st[1] + st[4]) / (n0 + n1);
            let v0 = (st[2] / n0 - m0 * m0).max(0.0);
            let v1 = (st[5] / n1 - m1 * m1).max(0.0);
            let num = n0 * (m0 - m).powi(2) + n1 * (m1 - m).powi(2);
            let den = n0 * v0 + n1 * v1;
            *o += num / den.max(1e-12);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfsParams {
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RfsParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RfsFit {
    pub row_norms: Vec<f64>,
    /// Objective after the initial solve and after every iteration.
    pub objective: Vec<f64>,
    pub converged: bool,
}

const RFS_EPS: f64 = 1e-10;

fn row_norms_smoothed(m: &DMatrix<f64>) -> Vec<f64> {
    m.row_iter()
        .map(|r| (r.norm_squared() + RFS_EPS).sqrt())
        .collect()
}

/// Joint l2,1-norm regression: minimizes the row-wise l2 norms of `XW - Y`
/// plus `gamma` times the row-wise l2 norms of `W` by iteratively reweighted
/// least squares with a tiny smoothing constant. `x` should be standardized;
/// `y` is centred internally.
pub fn rfs(x: &[Vec<f64>], y: &[Vec<bool>], params: &RfsParams) -> Result<RfsFit> {
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParameter("RFS gamma must be > 0".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("RFS on an empty dataset"));
    }
    let (n, d, l) = (x.len(), x[0].len(), y[0].len());
    let xm = DMatrix::from_fn(n, d, |i, j| x[i][j]);
    let mut ym = DMatrix::from_fn(n, l, |i, j| f64::from(u8::from(y[i][j])));
    for mut c in ym.column_iter_mut() {
        let mean = c.mean();
        c.add_scalar_mut(-mean);
    }
    let xt = xm.transpose();
    let solve = |a: DMatrix<f64>, b: DMatrix<f64>| -> Result<DMatrix<f64>> {
        a.cholesky()
            .map(|c| c.solve(&b))
            .ok_or_else(|| Error::NumericalRank("RFS system not positive definite".into()))
    };
    let objective = |w: &DMatrix<f64>| -> f64 {
        let r = &xm * w - &ym;
        row_norms_smoothed(&r).iter().sum::<f64>()
            + params.gamma * row_norms_smoothed(w).iter().sum::<f64>()
    };

    let mut gram = &xt * &xm;
    for i in 0..d {
        gram[(i, i)] += params.gamma;
    }
    let mut w = solve(gram, &xt * &ym)?;
    let mut trace = vec![objective(&w)];
    let mut converged = false;
    for _ in 0..params.max_iter {
        let r = &xm * &w - &ym;
        let dr: Vec<f64> = row_norms_smoothed(&r).iter().map(|v| 0.5 / v).collect();
        let dw: Vec<f64> = row_norms_smoothed(&w).iter().map(|v| 0.5 / v).collect();
        let mut dx = xm.clone();
        for (i, mut row) in dx.row_iter_mut().enumerate() {
            row *= dr[i];
        }
        let mut a = &xt * &dx;
        for i in 0..d {
            a[(i, i)] += params.gamma * dw[i];
        }
        let b = dx.transpose() * &ym;
        w = solve(a, b)?;
        let obj = objective(&w);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if (prev - obj).abs() <= params.tol * prev.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("RFS stopped at the iteration cap ({})", params.max_iter);
    }
    Ok(RfsFit {
        row_norms: w.row_iter().map(|r| r.norm()).collect(),
        objective: trace,
        converged,
    })
}

fn standardize(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    let d = x[0].len();
    let mut mean = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for r in x {
        for j in 0..d {
            mean[j] += r[j];
            sq[j] += r[j] * r[j];
        }
    }
    let scale: Vec<f64> = (0..d)
        .map(|j| {
            mean[j] /= n;
            let var = (sq[j] / n - mean[j] * mean[j]).max(0.0);
            if var > 1e-24 {
                1.0 / var.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    x.iter()
        .map(|r| (0..d).map(|j| (r[j] - mean[j]) * scale[j]).collect())
        .collect()
}

/// Ranks the columns of `x` (raw values, one row per instance) against the
/// label matrix `y` and keeps the top `m`.
pub fn rank_features(
    method: Method,
    x: &[Vec<f64>],
    y: &[Vec<bool>],
    names: &[String],
    m: usize,
) -> Result<FeatureRanking> {
    rank_features_with(method, x, y, names, m, &RfsParams::default())
}

pub fn rank_features_with(
    method: Method,
    x: &[Vec<f64>],
    y: &[Vec<bool>],
    names: &[String],
    m: usize,
    rfs_params: &RfsParams,
) -> Result<FeatureRanking> {
    check_inputs(x, y, names, m)?;
    let mut converged = true;
    let (features, scores) = match method {
        Method::Mlmim => {
            let ctx = MiContext::new(x, y);
            let rel: Vec<f64> = (0..names.len()).map(|f| ctx.relevance(f)).collect();
            sort_by_score(&rel, names, m)
        }
        Method::Mljmi => greedy(&MiContext::new(x, y), names, m, Greedy::Jmi),
        Method::Mlmrmr => greedy(&MiContext::new(x, y), names, m, Greedy::Mrmr),
        Method::Mifs => greedy(&MiContext::new(x, y), names, m, Greedy::Nmi),
        Method::FScore => sort_by_score(&fisher_scores(x, y), names, m),
        Method::Rfs => {
            let fit = rfs(&standardize(x), y, rfs_params)?;
            converged = fit.converged;
            sort_by_score(&fit.row_norms, names, m)
        }
    };
    Ok(FeatureRanking {
        method,
        names: features.iter().map(|&f| names[f].clone()).collect(),
        features,
        scores,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiEntry {
    pub rank: usize,
    pub feature: String,
    pub score: f64,
    pub mi_bits: f64,
}

/// Discretized MI of every ranked feature against the joint label vector.
pub fn mi_report(ranking: &FeatureRanking, x: &[Vec<f64>], y: &[Vec<bool>]) -> Vec<MiEntry> {
    let target: Vec<i64> = y
        .iter()
        .map(|r| r.iter().fold(0i64, |acc, &b| acc * 2 + i64::from(b)))
        .collect();
    let target = Coded::from_ints(&target);
    ranking
        .features
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let col = Coded::from_ints(&discretize(&x.iter().map(|r| r[f]).collect::<Vec<_>>()));
            MiEntry {
                rank: k + 1,
                feature: ranking.names[k].clone(),
                score: ranking.scores[k],
                mi_bits: mi_coded(&col, &target),
            }
        })
        .collect()
}

pub fn write_mi_csv<W: Write>(out: W, entries: &[MiEntry]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "feature", "score", "mi_bits"])?;
    for e in entries {
        w.write_record([
            e.rank.to_string(),
            e.feature.clone(),
            e.score.to_string(),
            e.mi_bits.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i:02}")).collect()
    }

    /// Direct double sum over the empirical joint table.
    fn mi_oracle(x: &[i64], y: &[i64]) -> f64 {
        let n = x.len() as f64;
        let mut pxy: HashMap<(i64, i64), f64> = HashMap::new();
        let mut px: HashMap<i64, f64> = HashMap::new();
        let mut py: HashMap<i64, f64> = HashMap::new();
        for (&a, &b) in x.iter().zip(y) {
            *pxy.entry((a, b)).or_default() += 1.0 / n;
            *px.entry(a).or_default() += 1.0 / n;
            *py.entry(b).or_default() += 1.0 / n;
        }
        pxy.iter()
            .map(|(&(a, b), &p)| p * (p / (px[&a] * py[&b])).log2())
            .sum()
    }

    #[test]
    fn hand_values() {
        assert_eq!(mutual_information(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
        assert_eq!(mutual_information(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(entropy(&[0, 0, 1, 1]), 1.0);
        assert_eq!(entropy(&[3, 3, 3]), 0.0);
        assert_eq!(discretize(&[1.9, -0.5, 2.0]), vec![1, -1, 2]);
        assert!(mutual_information(&[0], &[0, 1]).is_err());
        assert!(mutual_information(&[], &[]).is_err());
    }

    #[test]
    fn product_table_is_independent() {
        // x cycles within each y block, so the empirical table factorizes.
        let x: Vec<i64> = (0..12).map(|i| i % 3).collect();
        let y: Vec<i64> = (0..12).map(|i| i / 6).collect();
        assert!(mutual_information(&x, &y).unwrap().abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn mi_properties(pairs in proptest::collection::vec((0i64..5, -2i64..3), 1..60)) {
            let (x, y): (Vec<i64>, Vec<i64>) = pairs.into_iter().unzip();
            let ixy = mutual_information(&x, &y).unwrap();
            let iyx = mutual_information(&y, &x).unwrap();
            prop_assert_eq!(ixy, iyx);
            prop_assert!(ixy >= 0.0);
            prop_assert!(ixy <= entropy(&x).min(entropy(&y)));
            prop_assert_eq!(mutual_information(&x, &x).unwrap(), entropy(&x));
            prop_assert!((ixy - mi_oracle(&x, &y)).abs() < 1e-9);
        }
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<Vec<bool>> = (0..n)
            .map(|_| (0..3).map(|_| rng.gen_bool(0.4)).collect())
            .collect();
        let x = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(0.0..4.0)).collect())
            .collect();
        (x, y)
    }

    #[test]
    fn label_copy_ranks_first() {
        let (mut x, y) = random_problem(1, 200, 8);
        for (r, l) in x.iter_mut().zip(&y) {
            r[5] = f64::from(u8::from(l[1]));
        }
        let nm = names(8);
        for method in [Method::Mlmim, Method::Mljmi, Method::Mlmrmr, Method::Mifs, Method::FScore] {
            let r = rank_features(method, &x, &y, &nm, 3).unwrap();
            assert_eq!(r.features[0], 5, "{method}");
        }
    }

    #[test]
    fn duplicates_mrmr_vs_mim() {
        // Columns 0 and 1 copy label 0; column 2 is a noisy copy of label 1.
        let y: Vec<Vec<bool>> = (0..20)
            .map(|i| vec![i % 2 == 0, i % 4 < 2])
            .collect();
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let a = f64::from(u8::from(y[i][0]));
                let b = if i == 2 { 0.0 } else { f64::from(u8::from(y[i][1])) };
                vec![a, a, b, (i % 3) as f64]
            })
            .collect();
        let nm = names(4);
        let mim = rank_features(Method::Mlmim, &x, &y, &nm, 2).unwrap();
        assert_eq!(mim.features, vec![0, 1]);
        let mrmr = rank_features(Method::Mlmrmr, &x, &y, &nm, 2).unwrap();
        assert_eq!(mrmr.features, vec![0, 2]);
        // Exact arithmetic for the second MRMR pick: relevance of column 2
        // minus its MI with column 0 (labels 0 and 1 are independent here).
        let col = |f: usize| discretize(&x.iter().map(|r| r[f]).collect::<Vec<_>>());
        let lab = |l: usize| y.iter().map(|r| i64::from(r[l])).collect::<Vec<_>>();
        let rel2 = mutual_information(&col(2), &lab(0)).unwrap() + mutual_information(&col(2), &lab(1)).unwrap();
        let want = rel2 - mutual_information(&col(2), &col(0)).unwrap();
        assert!((mrmr.scores[1] - want).abs() < 1e-12);
    }

    #[test]
    fn full_selection_is_permutation() {
        let (x, y) = random_problem(2, 60, 7);
        let nm = names(7);
        for method in Method::ALL {
            let r = rank_features(method, &x, &y, &nm, 7).unwrap();
            let mut f = r.features.clone();
            f.sort();
            assert_eq!(f, (0..7).collect::<Vec<_>>(), "{method}");
            assert_eq!(r, rank_features(method, &x, &y, &nm, 7).unwrap());
        }
        assert!(rank_features(Method::Mlmim, &x, &y, &nm, 8).is_err());
    }

    #[test]
    fn score_methods_are_non_increasing() {
        let (x, y) = random_problem(3, 80, 10);
        let nm = names(10);
        for method in [Method::Mlmim, Method::FScore, Method::Rfs] {
            let r = rank_features(method, &x, &y, &nm, 10).unwrap();
            assert!(r.scores.windows(2).all(|w| w[0] >= w[1]), "{method}");
        }
    }

    #[test]
    fn ties_break_by_name() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![(i % 2) as f64; 3]).collect();
        let y: Vec<Vec<bool>> = (0..10).map(|i| vec![i % 2 == 0]).collect();
        let nm = vec!["c".to_string(), "a".into(), "b".into()];
        let r = rank_features(Method::Mlmim, &x, &y, &nm, 3).unwrap();
        assert_eq!(r.names, vec!["a", "b", "c"]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("lasso".parse::<Method>().is_err());
    }

    fn linear_problem(seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y = x
            .iter()
            .map(|r| vec![r[2] + r[7] > 0.0, r[7] - r[10] > 0.0, r[2] + r[10] > 0.3])
            .collect();
        (standardize(&x), y)
    }

    #[test]
    fn rfs_recovers_support() {
        let (x, y) = linear_problem(4);
        let fit = rfs(&x, &y, &RfsParams { gamma: 0.1, ..Default::default() }).unwrap();
        let (top, _) = sort_by_score(&fit.row_norms, &names(12), 3);
        let mut top = top;
        top.sort();
        assert_eq!(top, vec![2, 7, 10]);
        assert!(fit.converged);
    }

    #[test]
    fn rfs_objective_monotone() {
        let (x, y) = linear_problem(5);
        for gamma in [0.01, 1.0, 30.0] {
            let fit = rfs(&x, &y, &RfsParams { gamma, ..Default::default() }).unwrap();
            for w in fit.objective.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "gamma {gamma}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn rfs_shrinks_with_gamma() {
        let (x, y) = linear_problem(6);
        let total = |g: f64| {
            rfs(&x, &y, &RfsParams { gamma: g, ..Default::default() })
                .unwrap()
                .row_norms
                .iter()
                .sum::<f64>()
        };
        let norms: Vec<f64> = [0.1, 10.0, 1e3, 1e5].iter().map(|&g| total(g)).collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
        assert!(norms[3] < norms[0] * 1e-2);
        assert!(rfs(&x, &y, &RfsParams { gamma: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn mi_report_values() {
        let y: Vec<Vec<bool>> = (0..8).map(|i| vec![i % 2 == 0, i < 4]).collect();
        let x: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![7.0, f64::from(u8::from(y[i][0])), (i % 4) as f64 + 0.5])
            .collect();
        let nm = names(3);
        let r = rank_features(Method::Mlmim, &x, &y, &nm, 3).unwrap();
        let rep = mi_report(&r, &x, &y);
        let get = |name: &str| rep.iter().find(|e| e.feature == name).unwrap().mi_bits;
        assert_eq!(get("f00"), 0.0);
        assert_eq!(get("f01"), 1.0);
        // floor(i % 4 + 0.5) against the 4-valued label vector: i%4 fixes
        // label 0 but not label 1, so I = H(label 0) = 1 bit.
        assert_eq!(get("f02"), 1.0);
        let mut buf = Vec::new();
        write_mi_csv(&mut buf, &rep).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("rank,feature,score,mi_bits\n1,"));
    }
}
