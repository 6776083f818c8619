//! Multilabel SMOTE oversampling of training data.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature matrix with binary label matrix, row-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<bool>>,
    /// True for rows produced by oversampling.
    pub synthetic: Vec<bool>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<Vec<bool>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows vs {} label rows",
                x.len(),
                y.len()
            )));
        }
        let d = x.first().map_or(0, Vec::len);
        let n = y.first().map_or(0, Vec::len);
        if x.iter().any(|r| r.len() != d) || y.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let synthetic = vec![false; x.len()];
        Ok(Self { x, y, synthetic })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn n_labels(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_labels()];
        for row in &self.y {
            for (k, &b) in row.iter().enumerate() {
                c[k] += usize::from(b);
            }
        }
        c
    }

    /// Writes features, labels and a trailing `synthetic` column.
    pub fn write_csv<W: Write>(&self, out: W, feature_names: &[String]) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = feature_names.to_vec();
        header.extend((1..=self.n_labels()).map(|j| format!("aoi_{j}")));
        header.push("synthetic".into());
        w.write_record(&header)?;
        for ((x, y), s) in self.x.iter().zip(&self.y).zip(&self.synthetic) {
            let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            rec.extend(y.iter().map(|&b| u8::from(b).to_string()));
            rec.push(s.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceStats {
    /// Most frequent label count over this label's count; infinite for
    /// absent labels.
    pub irlbl: Vec<f64>,
    /// Mean of the finite `irlbl` entries.
    pub mean_ir: f64,
}

impl ImbalanceStats {
    pub fn of(y: &[Vec<bool>]) -> Self {
        let n = y.first().map_or(0, Vec::len);
        let mut counts = vec![0usize; n];
        for row in y {
            for (k, &b) in row.iter().enumerate() {
                counts[k] += usize::from(b);
            }
        }
        let max = counts.iter().copied().max().unwrap_or(0) as f64;
        let irlbl: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { f64::INFINITY } else { max / c as f64 })
            .collect();
        let finite: Vec<f64> = irlbl.iter().copied().filter(|v| v.is_finite()).collect();
        let mean_ir = if finite.is_empty() {
            0.0
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        Self { irlbl, mean_ir }
    }

    pub fn minority_labels(&self) -> Vec<usize> {
        (0..self.irlbl.len())
            .filter(|&k| self.irlbl[k].is_finite() && self.irlbl[k] > self.mean_ir)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlsmoteParams {
    pub k: usize,
    pub seed: u64,
}

impl Default for MlsmoteParams {
    fn default() -> Self {
        Self { k: 5, seed: 0 }
    }
}

fn zscore(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    let d = x.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; d];
    for r in x {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut sd = vec![0.0; d];
    for r in x {
        for ((s, v), m) in sd.iter_mut().zip(r).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    let inv: Vec<f64> = sd
        .iter()
        .map(|s| if *s > 0.0 { 1.0 / s.sqrt() } else { 0.0 })
        .collect();
    x.iter()
        .map(|r| r.iter().zip(&mean).zip(&inv).map(|((v, m), i)| (v - m) * i).collect())
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Augments `train` with synthetic rows for every minority label.
///
/// Each bag member of a minority label seeds one synthetic row, interpolated
/// per feature towards a random one of its `k` nearest bag neighbours
/// (Euclidean on z-scored features, ties by row index). A label is set on the
/// new row iff it is active on more than half of the seed and its neighbours.
/// Seeds without neighbours are skipped.
pub fn mlsmote(train: &Dataset, params: &MlsmoteParams) -> Result<Dataset> {
    if params.k < 1 {
        return Err(Error::InvalidParameter("MLSMOTE needs k >= 1".into()));
    }
    let mut out = train.clone();
    if train.is_empty() {
        return Ok(out);
    }
    let stats = ImbalanceStats::of(&train.y);
    let z = zscore(&train.x);
    let n_labels = train.n_labels();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    for label in stats.minority_labels() {
        let bag: Vec<usize> = (0..train.len()).filter(|&i| train.y[i][label]).collect();
        for &seed in &bag {
            let mut cand: Vec<(f64, usize)> = bag
                .iter()
                .filter(|&&j| j != seed)
                .map(|&j| (sq_dist(&z[seed], &z[j]), j))
                .collect();
            if cand.is_empty() {
                continue;
            }
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.truncate(params.k);
            let neighbours: Vec<usize> = cand.iter().map(|c| c.1).collect();
            let reference = neighbours[rng.gen_range(0..neighbours.len())];

            let x: Vec<f64> = train.x[seed]
                .iter()
                .zip(&train.x[reference])
                .map(|(&s, &r)| s + rng.gen::<f64>() * (r - s))
                .collect();
            let voters = neighbours.len() + 1;
            let y: Vec<bool> = (0..n_labels)
                .map(|l| {
                    let votes = usize::from(train.y[seed][l])
                        + neighbours.iter().filter(|&&j| train.y[j][l]).count();
                    2 * votes > voters
                })
                .collect();
            out.x.push(x);
            out.y.push(y);
            out.synthetic.push(true);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(x: Vec<Vec<f64>>, y: Vec<Vec<bool>>) -> Dataset {
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn balanced_input_unchanged() {
        let d = ds(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![vec![true, false], vec![false, true], vec![true, false], vec![false, true]],
        );
        assert_eq!(mlsmote(&d, &MlsmoteParams::default()).unwrap(), d);
    }

    #[test]
    fn lone_seed_is_skipped() {
        // Label 1 has a single bearer.
        let d = ds(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![vec![true, true], vec![true, false], vec![true, false], vec![true, false]],
        );
        assert!(ImbalanceStats::of(&d.y).minority_labels() == vec![1]);
        let out = mlsmote(&d, &MlsmoteParams::default()).unwrap();
        assert_eq!(out.len(), d.len());
    }

    #[test]
    fn crafted_six_instances() {
        let x = vec![
            vec![0.0, 10.0],
            vec![4.0, 2.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
            vec![5.0, 5.0],
        ];
        let y = vec![
            vec![true, true],
            vec![true, true],
            vec![true, false],
            vec![true, false],
            vec![true, false],
            vec![true, false],
        ];
        let d = ds(x.clone(), y);
        // IRLbl = (1, 3), MeanIR = 2.
        let stats = ImbalanceStats::of(&d.y);
        assert_eq!(stats.irlbl, vec![1.0, 3.0]);
        assert_eq!(stats.mean_ir, 2.0);
        let out = mlsmote(&d, &MlsmoteParams { k: 1, seed: 3 }).unwrap();
        assert_eq!(out.len(), 8);
        assert_eq!(&out.x[..6], &x[..]);
        for (row, (a, b)) in out.x[6..].iter().zip([(0, 1), (1, 0)]) {
            for f in 0..2 {
                let (lo, hi) = (x[a][f].min(x[b][f]), x[a][f].max(x[b][f]));
                assert!(row[f] >= lo && row[f] <= hi);
            }
        }
        assert!(out.y[6..].iter().all(|l| l == &vec![true, true]));
        assert_eq!(out.synthetic, vec![false, false, false, false, false, false, true, true]);
        assert!(ImbalanceStats::of(&out.y).mean_ir < stats.mean_ir);
    }

    #[test]
    fn rejects_zero_k() {
        let d = ds(vec![vec![0.0]], vec![vec![true]]);
        assert!(matches!(
            mlsmote(&d, &MlsmoteParams { k: 0, seed: 0 }),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn shape_errors() {
        assert!(Dataset::new(vec![vec![0.0]], vec![]).is_err());
        assert!(Dataset::new(vec![vec![0.0], vec![]], vec![vec![true], vec![false]]).is_err());
    }

    #[test]
    fn csv_has_synthetic_column() {
        let d = ds(vec![vec![1.5]], vec![vec![true]]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf, &["f".to_string()]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "f,aoi_1,synthetic\n1.5,1,false\n");
    }

    fn random_set(seed: u64, rows: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs: Vec<f64> = (0..6).map(|_| rng.gen_range(0.05..0.8)).collect();
        let x = (0..rows)
            .map(|_| (0..4).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        let y = (0..rows)
            .map(|_| probs.iter().map(|&p| rng.gen_bool(p)).collect())
            .collect();
        ds(x, y)
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn invariants(seed in 0u64..10_000, rows in 20usize..80, k in 1usize..7) {
            let d = random_set(seed, rows);
            let p = MlsmoteParams { k, seed };
            let out = mlsmote(&d, &p).unwrap();
            proptest::prop_assert_eq!(&out.x[..d.len()], &d.x[..]);
            proptest::prop_assert_eq!(&out.y[..d.len()], &d.y[..]);
            proptest::prop_assert_eq!(&out, &mlsmote(&d, &p).unwrap());
            // Every synthetic coordinate lies between two real rows' values.
            for row in &out.x[d.len()..] {
                for (f, v) in row.iter().enumerate() {
                    let lo = d.x.iter().map(|r| r[f]).fold(f64::INFINITY, f64::min);
                    let hi = d.x.iter().map(|r| r[f]).fold(f64::NEG_INFINITY, f64::max);
                    proptest::prop_assert!(*v >= lo && *v <= hi);
                }
            }
        }
    }

    #[test]
    fn mean_ir_can_rise_when_majority_label_is_inherited() {
        // Minority bearers all carry the majority label too, so every
        // synthetic row raises the maximum count.
        let mut y = vec![vec![true, true, false, false, false, false]; 4];
        y.extend(vec![vec![false, false, true, true, true, true]; 10]);
        y.extend(vec![vec![true, false, false, false, false, false]; 6]);
        let x = (0..y.len()).map(|i| vec![i as f64]).collect();
        let d = ds(x, y);
        let before = ImbalanceStats::of(&d.y);
        assert_eq!(before.minority_labels(), vec![1]);
        let out = mlsmote(&d, &MlsmoteParams::default()).unwrap();
        assert_eq!(out.len(), 24);
        assert!(ImbalanceStats::of(&out.y).mean_ir > before.mean_ir);
    }
}
