//! Multilabel classifiers: ridge regression, KNN, linear SVM and MLKNN,
//! wrapped as binary relevance or classifier chains.

pub mod knn;
pub mod mlknn;
pub mod ridge;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use knn::{knn_scores, nearest, KnnModel};
pub use mlknn::MlknnModel;
pub use ridge::{normal_equation_residual, train_ridge, RidgeModel};
pub use svm::{train_svm, LinearSvm, SvmFit, SvmParams};

/// Decision threshold on ridge and KNN scores.
pub const THRESHOLD: f64 = 0.5;

/// Per-column standardization fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Multiplier applied after centring; 0 for constant columns.
    pub inv_sd: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("scaler fitted on zero rows"));
        }
        let n = x.len() as f64;
        let d = x[0].len();
        let mut mean = vec![0.0; d];
        for r in x {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in x {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let inv_sd = var
            .iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    1.0 / sd
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self { mean, inv_sd })
    }

    pub fn transform_row(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(&self.mean)
            .zip(&self.inv_sd)
            .map(|((v, m), s)| (v - m) * s)
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "RR")]
    Rr,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "SVM")]
    Svm,
    #[serde(rename = "MLKNN")]
    Mlknn,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Rr, Family::Knn, Family::Svm, Family::Mlknn];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Rr => "RR",
            Family::Knn => "KNN",
            Family::Svm => "SVM",
            Family::Mlknn => "MLKNN",
        }
    }

    pub fn has_confidence(self) -> bool {
        self != Family::Svm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wrapper {
    #[serde(rename = "BR")]
    Br,
    #[serde(rename = "CC")]
    Cc,
}

impl Wrapper {
    pub fn as_str(self) -> &'static str {
        match self {
            Wrapper::Br => "BR",
            Wrapper::Cc => "CC",
        }
    }
}

/// A classifier family plus its wrapper (none for MLKNN). Serialized by
/// name, e.g. `"RR-BR"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModelKind {
    pub family: Family,
    pub wrapper: Option<Wrapper>,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::new(Family::Rr, Some(Wrapper::Br)),
        ModelKind::new(Family::Rr, Some(Wrapper::Cc)),
        ModelKind::new(Family::Knn, Some(Wrapper::Br)),
        ModelKind::new(Family::Knn, Some(Wrapper::Cc)),
        ModelKind::new(Family::Svm, Some(Wrapper::Br)),
        ModelKind::new(Family::Svm, Some(Wrapper::Cc)),
        ModelKind::new(Family::Mlknn, None),
    ];

    pub const fn new(family: Family, wrapper: Option<Wrapper>) -> Self {
        Self { family, wrapper }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.wrapper {
            Some(w) => write!(f, "{}-{}", self.family.as_str(), w.as_str()),
            None => f.write_str(self.family.as_str()),
        }
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model `{s}`")))
    }
}

/// Hyperparameter grids per family and the feature-count grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperGrid {
    pub lambda: Vec<f64>,
    pub knn_k: Vec<usize>,
    pub svm_c: Vec<f64>,
    pub mlknn_k: usize,
    pub feature_counts: Vec<usize>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            lambda: (1..=8).map(|i| i as f64 * 0.25).collect(),
            knn_k: (1..=6).map(|i| i * 5).collect(),
            svm_c: (1..=10).map(|i| (i as f64 * 0.2 * 10.0).round() / 10.0).collect(),
            mlknn_k: 15,
            feature_counts: (1..=8).map(|i| i * 5).collect(),
        }
    }
}

impl HyperGrid {
    /// Parameter values searched for a family (MLKNN has the single `k`).
    pub fn params(&self, family: Family) -> Vec<f64> {
        match family {
            Family::Rr => self.lambda.clone(),
            Family::Knn => self.knn_k.iter().map(|&k| k as f64).collect(),
            Family::Svm => self.svm_c.clone(),
            Family::Mlknn => vec![self.mlknn_k as f64],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("grid `{what}` is empty or invalid")));
        if self.lambda.is_empty() || self.lambda.iter().any(|l| !(*l > 0.0)) {
            return bad("lambda");
        }
        if self.knn_k.is_empty() || self.knn_k.contains(&0) {
            return bad("knn_k");
        }
        if self.svm_c.is_empty() || self.svm_c.iter().any(|c| !(*c > 0.0)) {
            return bad("svm_c");
        }
        if self.mlknn_k == 0 {
            return bad("mlknn_k");
        }
        if self.feature_counts.is_empty() || self.feature_counts.contains(&0) {
            return bad("feature_counts");
        }
        Ok(())
    }
}

/// Predicted label bits with optional per-label confidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub bits: Vec<Vec<bool>>,
    pub confidence: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BinaryModel {
    Ridge(RidgeModel),
    Knn(KnnModel),
    Svm(LinearSvm),
}

impl BinaryModel {
    fn fit(family: Family, param: f64, x: &[Vec<f64>], y: &[bool]) -> Result<Self> {
        match family {
            Family::Rr => train_ridge(x, y, param).map(BinaryModel::Ridge),
            Family::Knn => KnnModel::fit(x, y, param as usize).map(BinaryModel::Knn),
            Family::Svm => train_svm(x, y, &SvmParams::new(param)).map(|f| BinaryModel::Svm(f.model)),
            Family::Mlknn => Err(Error::UnsupportedModel("MLKNN is not a binary learner".into())),
        }
    }

    /// Bit and, where available, a confidence score.
    fn predict(&self, x: &[f64]) -> (bool, Option<f64>) {
        match self {
            BinaryModel::Ridge(m) => {
                let s = m.score(x);
                (s >= THRESHOLD, Some(s))
            }
            BinaryModel::Knn(m) => {
                let s = m.score(x);
                (s >= THRESHOLD, Some(s))
            }
            BinaryModel::Svm(m) => (m.predict(x), None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MultiLabelModel {
    /// One model per label on the shared features.
    BinaryRelevance(Vec<BinaryModel>),
    /// Model `l` also sees the bits of labels `0..l` as extra 0/1 columns.
    Chain(Vec<BinaryModel>),
    Mlknn(MlknnModel),
}

fn with_bits(row: &[f64], bits: &[bool]) -> Vec<f64> {
    let mut r = row.to_vec();
    r.extend(bits.iter().map(|&b| f64::from(u8::from(b))));
    r
}

impl MultiLabelModel {
    pub fn fit(kind: ModelKind, param: f64, x: &[Vec<f64>], y: &[Vec<bool>]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch(format!("{} rows vs {} label rows", x.len(), y.len())));
        }
        let n = y.first().map_or(0, Vec::len);
        let column = |l: usize| y.iter().map(|r| r[l]).collect::<Vec<_>>();
        match (kind.family, kind.wrapper) {
            (Family::Mlknn, _) => MlknnModel::train(x, y, param as usize, 1.0).map(MultiLabelModel::Mlknn),
            (f, Some(Wrapper::Br) | None) => (0..n)
                .map(|l| {
                    BinaryModel::fit(f, param, x, &column(l))
                        .map_err(|e| Error::InvalidParameter(format!("label {}: {e}", l + 1)))
                })
                .collect::<Result<_>>()
                .map(MultiLabelModel::BinaryRelevance),
            (f, Some(Wrapper::Cc)) => (0..n)
                .map(|l| {
                    let xa: Vec<Vec<f64>> = x.iter().zip(y).map(|(r, t)| with_bits(r, &t[..l])).collect();
                    BinaryModel::fit(f, param, &xa, &column(l))
                        .map_err(|e| Error::InvalidParameter(format!("label {}: {e}", l + 1)))
                })
                .collect::<Result<_>>()
                .map(MultiLabelModel::Chain),
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Prediction {
        let mut bits = Vec::with_capacity(x.len());
        let mut conf: Vec<Vec<f64>> = Vec::with_capacity(x.len());
        let mut has_conf = true;
        for row in x {
            let (b, c): (Vec<bool>, Vec<Option<f64>>) = match self {
                MultiLabelModel::BinaryRelevance(ms) => ms.iter().map(|m| m.predict(row)).unzip(),
                MultiLabelModel::Chain(ms) => {
                    let mut b = Vec::with_capacity(ms.len());
                    let mut c = Vec::with_capacity(ms.len());
                    for m in ms {
                        let (bit, score) = m.predict(&with_bits(row, &b));
                        b.push(bit);
                        c.push(score);
                    }
                    (b, c)
                }
                MultiLabelModel::Mlknn(m) => {
                    let (b, p) = m.predict(row);
                    (b, p.into_iter().map(Some).collect())
                }
            };
            has_conf &= c.iter().all(Option::is_some);
            conf.push(c.into_iter().map(|v| v.unwrap_or(0.0)).collect());
            bits.push(b);
        }
        let confidence = if has_conf { Some(conf) } else { None };
        Prediction { bits, confidence }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_matches_published_ranges() {
        let g = HyperGrid::default();
        assert_eq!(g.lambda, vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(g.knn_k, vec![5, 10, 15, 20, 25, 30]);
        assert_eq!(g.svm_c, vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0]);
        assert_eq!(g.feature_counts, vec![5, 10, 15, 20, 25, 30, 35, 40]);
        assert_eq!(g.mlknn_k, 15);
        g.validate().unwrap();
    }

    #[test]
    fn kind_names() {
        for k in ModelKind::ALL {
            assert_eq!(k.to_string().parse::<ModelKind>().unwrap(), k);
        }
        assert_eq!(ModelKind::ALL[1].to_string(), "RR-CC");
    }

    #[test]
    fn scaler() {
        let x = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Scaler::fit(&x).unwrap();
        assert_eq!(s.transform(&x), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }

    fn data(seed: u64, n: usize, labels: usize) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y = x
            .iter()
            .map(|r| (0..labels).map(|l| r[l % 3] + rng.gen_range(-0.3..0.3) > 0.0).collect())
            .collect();
        (x, y)
    }

    #[test]
    fn single_label_br_equals_cc() {
        let (x, y) = data(1, 60, 1);
        for family in [Family::Rr, Family::Knn, Family::Svm] {
            let p = [1.0, 5.0, 1.0][family as usize];
            let br = MultiLabelModel::fit(ModelKind::new(family, Some(Wrapper::Br)), p, &x, &y).unwrap();
            let cc = MultiLabelModel::fit(ModelKind::new(family, Some(Wrapper::Cc)), p, &x, &y).unwrap();
            assert_eq!(br.predict(&x), cc.predict(&x));
        }
    }

    #[test]
    fn chain_copies_duplicate_label() {
        let (x, y) = data(2, 80, 1);
        let y2: Vec<Vec<bool>> = y.iter().map(|r| vec![r[0], r[0]]).collect();
        let cc = MultiLabelModel::fit(ModelKind::new(Family::Rr, Some(Wrapper::Cc)), 0.25, &x, &y2).unwrap();
        let MultiLabelModel::Chain(ms) = &cc else { unreachable!() };
        let BinaryModel::Ridge(second) = &ms[1] else { unreachable!() };
        for (r, t) in x.iter().zip(&y2) {
            let s = second.score(&with_bits(r, &t[..1]));
            assert_eq!(s >= THRESHOLD, t[1]);
        }
    }

    #[test]
    fn independent_labels_br_matches_cc() {
        let (x, y) = data(3, 10_000, 3);
        let (xt, _) = data(4, 2_000, 3);
        let br = MultiLabelModel::fit(ModelKind::new(Family::Rr, Some(Wrapper::Br)), 1.0, &x, &y).unwrap();
        let cc = MultiLabelModel::fit(ModelKind::new(Family::Rr, Some(Wrapper::Cc)), 1.0, &x, &y).unwrap();
        let (pb, pc) = (br.predict(&xt), cc.predict(&xt));
        let agree = pb.bits.iter().zip(&pc.bits).filter(|(a, b)| a == b).count();
        assert!(agree as f64 / xt.len() as f64 > 0.97, "{agree}");
    }

    #[test]
    fn svm_has_no_confidence() {
        let (x, y) = data(5, 40, 2);
        let m = MultiLabelModel::fit(ModelKind::new(Family::Svm, Some(Wrapper::Br)), 1.0, &x, &y).unwrap();
        assert!(m.predict(&x).confidence.is_none());
        let k = MultiLabelModel::fit(ModelKind::new(Family::Knn, Some(Wrapper::Br)), 5.0, &x, &y).unwrap();
        assert!(k.predict(&x).confidence.is_some());
        assert!(MultiLabelModel::fit(ModelKind::new(Family::Knn, Some(Wrapper::Br)), 41.0, &x, &y).is_err());
    }

    #[test]
    fn knn_permutation_invariant() {
        let (x, y) = data(6, 50, 2);
        let (q, _) = data(7, 20, 2);
        let kind = ModelKind::new(Family::Mlknn, None);
        let a = MultiLabelModel::fit(kind, 15.0, &x, &y).unwrap().predict(&q);
        let (xr, yr): (Vec<_>, Vec<_>) = x.iter().cloned().zip(y.iter().cloned()).rev().unzip();
        let b = MultiLabelModel::fit(kind, 15.0, &xr, &yr).unwrap().predict(&q);
        assert_eq!(a, b);
        let kk = ModelKind::new(Family::Knn, Some(Wrapper::Br));
        assert_eq!(
            MultiLabelModel::fit(kk, 10.0, &x, &y).unwrap().predict(&q),
            MultiLabelModel::fit(kk, 10.0, &xr, &yr).unwrap().predict(&q)
        );
    }
}
