//! Multilabel evaluation metrics and majority-class baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<()> {
    if y.len() != z.len() || y.iter().zip(z).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::ShapeMismatch("label and prediction shapes differ".into()));
    }
    Ok(())
}

fn mean_over<F: Fn(&[bool], &[bool]) -> f64>(y: &[Vec<bool>], z: &[Vec<bool>], f: F) -> Result<f64> {
    check(y, z)?;
    if y.is_empty() {
        return Err(Error::EmptyInput("metric over zero instances"));
    }
    let s: f64 = y.iter().zip(z).map(|(a, b)| f(a, b)).sum();
    Ok(s / y.len() as f64)
}

fn counts(a: &[bool], b: &[bool]) -> (usize, usize, usize, usize) {
    let inter = a.iter().zip(b).filter(|(p, q)| **p && **q).count();
    let union = a.iter().zip(b).filter(|(p, q)| **p || **q).count();
    let ya = a.iter().filter(|&&v| v).count();
    let zb = b.iter().filter(|&&v| v).count();
    (inter, union, ya, zb)
}

/// Mean Jaccard overlap; an instance with both sets empty scores 1.
pub fn accuracy(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<f64> {
    mean_over(y, z, |a, b| {
        let (i, u, _, _) = counts(a, b);
        if u == 0 {
            1.0
        } else {
            i as f64 / u as f64
        }
    })
}

pub fn subset_accuracy(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<f64> {
    mean_over(y, z, |a, b| if a == b { 1.0 } else { 0.0 })
}

/// Empty predicted set scores 1 only if the true set is empty too.
pub fn precision(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<f64> {
    mean_over(y, z, |a, b| {
        let (i, _, ny, nz) = counts(a, b);
        if nz == 0 {
            if ny == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            i as f64 / nz as f64
        }
    })
}

/// Empty true set scores 1 only if the predicted set is empty too.
pub fn recall(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<f64> {
    mean_over(y, z, |a, b| {
        let (i, _, ny, nz) = counts(a, b);
        if ny == 0 {
            if nz == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            i as f64 / ny as f64
        }
    })
}

/// Harmonic mean of the instance-averaged precision and recall.
pub fn f_measure(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<f64> {
    let p = precision(y, z)?;
    let r = recall(y, z)?;
    Ok(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
}

/// Fraction of instances where each label bit is predicted correctly.
pub fn per_label_accuracy(y: &[Vec<bool>], z: &[Vec<bool>]) -> Result<Vec<f64>> {
    check(y, z)?;
    if y.is_empty() {
        return Err(Error::EmptyInput("metric over zero instances"));
    }
    let n = y[0].len();
    Ok((0..n)
        .map(|l| y.iter().zip(z).filter(|(a, b)| a[l] == b[l]).count() as f64 / y.len() as f64)
        .collect())
}

/// Fraction of (positive, negative) pairs ranked with `r(pos) >= r(neg)`.
/// `None` when the label has no positives or no negatives.
pub fn auc_label(y: &[bool], scores: &[f64]) -> Option<f64> {
    let mut pos: Vec<f64> = y.iter().zip(scores).filter(|(b, _)| **b).map(|(_, s)| *s).collect();
    let mut neg: Vec<f64> = y.iter().zip(scores).filter(|(b, _)| !**b).map(|(_, s)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    // For each positive, count negatives with score <= it.
    let mut hits: u64 = 0;
    let mut k = 0;
    for p in &pos {
        while k < neg.len() && neg[k] <= *p {
            k += 1;
        }
        hits += k as u64;
    }
    Some(hits as f64 / (pos.len() as u64 * neg.len() as u64) as f64)
}

/// Macro average of [`auc_label`] over labels that have both classes.
/// Fails for models without confidence scores; `Ok(None)` when no label
/// qualifies.
pub fn auc_macro(y: &[Vec<bool>], confidences: Option<&[Vec<f64>]>) -> Result<Option<f64>> {
    let conf = confidences
        .ok_or_else(|| Error::UnsupportedModel("model produces no confidence scores".into()))?;
    if y.len() != conf.len() || y.iter().zip(conf).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::ShapeMismatch("label and confidence shapes differ".into()));
    }
    let n = y.first().map_or(0, Vec::len);
    let mut sum = 0.0;
    let mut used = 0usize;
    for l in 0..n {
        let col: Vec<bool> = y.iter().map(|r| r[l]).collect();
        let sc: Vec<f64> = conf.iter().map(|r| r[l]).collect();
        if let Some(a) = auc_label(&col, &sc) {
            sum += a;
            used += 1;
        }
    }
    Ok((used > 0).then(|| sum / used as f64))
}

/// Modal class of one label column and its frequency; ties go to class 1.
pub fn majority_class(column: &[bool]) -> Result<(bool, f64)> {
    if column.is_empty() {
        return Err(Error::EmptyInput("majority class of an empty column"));
    }
    let ones = column.iter().filter(|&&b| b).count();
    let zeros = column.len() - ones;
    let n = column.len() as f64;
    Ok(if ones >= zeros {
        (true, ones as f64 / n)
    } else {
        (false, zeros as f64 / n)
    })
}

/// Most frequent full label vector and its frequency. Ties resolve to the
/// lexicographically smallest vector.
pub fn majority_vector(y: &[Vec<bool>]) -> Result<(Vec<bool>, f64)> {
    if y.is_empty() {
        return Err(Error::EmptyInput("majority vector of an empty set"));
    }
    let mut sorted: Vec<&Vec<bool>> = y.iter().collect();
    sorted.sort();
    let mut best: (&Vec<bool>, usize) = (sorted[0], 0);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best.1 {
            best = (sorted[i], j - i);
        }
        i = j;
    }
    Ok((best.0.clone(), best.1 as f64 / y.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// Per-label majority-class frequency.
    pub per_label: Vec<f64>,
    /// Frequency of the modal label vector.
    pub vector: f64,
    /// Jaccard accuracy of always predicting the per-label majority vector.
    pub accuracy: f64,
}

pub fn baselines(y: &[Vec<bool>]) -> Result<Baselines> {
    let (_, vector) = majority_vector(y)?;
    let n = y[0].len();
    let mut per_label = Vec::with_capacity(n);
    let mut modal = Vec::with_capacity(n);
    for l in 0..n {
        let (c, r) = majority_class(&y.iter().map(|row| row[l]).collect::<Vec<_>>())?;
        per_label.push(r);
        modal.push(c);
    }
    let z = vec![modal; y.len()];
    Ok(Baselines {
        per_label,
        vector,
        accuracy: accuracy(y, &z)?,
    })
}

/// Metrics of one model on one test fold. Precision, recall and F are
/// computed for every model; AUC only where confidences exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub auc: Option<f64>,
    pub exact: f64,
    pub f_measure: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub per_label: Vec<f64>,
}

impl FoldMetrics {
    pub fn compute(y: &[Vec<bool>], z: &[Vec<bool>], confidences: Option<&[Vec<f64>]>) -> Result<Self> {
        let auc = match confidences {
            Some(c) => auc_macro(y, Some(c))?,
            None => None,
        };
        Ok(Self {
            auc,
            exact: subset_accuracy(y, z)?,
            f_measure: f_measure(y, z)?,
            accuracy: accuracy(y, z)?,
            precision: precision(y, z)?,
            recall: recall(y, z)?,
            per_label: per_label_accuracy(y, z)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd })
    }
}

/// Fold-aggregated metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: Option<MeanSd>,
    pub exact: MeanSd,
    pub f_measure: MeanSd,
    pub accuracy: MeanSd,
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub per_label: Vec<f64>,
}

impl EvalReport {
    pub fn aggregate(folds: &[FoldMetrics]) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::EmptyInput("report over zero folds"));
        }
        let col = |f: fn(&FoldMetrics) -> f64| -> MeanSd {
            MeanSd::of(&folds.iter().map(f).collect::<Vec<_>>()).unwrap()
        };
        let aucs: Vec<f64> = folds.iter().filter_map(|f| f.auc).collect();
        let n = folds[0].per_label.len();
        Ok(Self {
            auc: MeanSd::of(&aucs),
            exact: col(|f| f.exact),
            f_measure: col(|f| f.f_measure),
            accuracy: col(|f| f.accuracy),
            precision: col(|f| f.precision),
            recall: col(|f| f.recall),
            per_label: (0..n)
                .map(|l| folds.iter().map(|f| f.per_label[l]).sum::<f64>() / folds.len() as f64)
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn hand_pair() {
        let y = vec![bits("101100")];
        let z = vec![bits("100100")];
        assert!((accuracy(&y, &z).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(subset_accuracy(&y, &z).unwrap(), 0.0);
        assert_eq!(precision(&y, &z).unwrap(), 1.0);
        assert!((recall(&y, &z).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((f_measure(&y, &z).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn conventions() {
        let empty = vec![bits("000000")];
        assert_eq!(accuracy(&empty, &empty).unwrap(), 1.0);
        assert_eq!(precision(&empty, &empty).unwrap(), 1.0);
        assert_eq!(recall(&empty, &empty).unwrap(), 1.0);
        let y = vec![bits("110"), bits("001")];
        let comp = vec![bits("001"), bits("110")];
        assert_eq!(precision(&y, &comp).unwrap(), 0.0);
        assert_eq!(recall(&y, &comp).unwrap(), 0.0);
        assert_eq!(f_measure(&y, &comp).unwrap(), 0.0);
        let one_off = vec![bits("110"), bits("000")];
        assert_eq!(subset_accuracy(&y, &one_off).unwrap(), 0.5);
        assert!(accuracy(&y, &y[..1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn auc_cases() {
        let y = vec![true, true, true, false, false];
        // Pairs: 0.9>0.3,0.9>0.5; 0.4>0.3, 0.4<0.5; 0.5>=0.3, 0.5>=0.5.
        let s = [0.9, 0.4, 0.5, 0.3, 0.5];
        assert_eq!(auc_label(&y, &s), Some(5.0 / 6.0));
        assert_eq!(auc_label(&[true, false], &[1.0, 0.0]), Some(1.0));
        assert_eq!(auc_label(&[true, true], &[1.0, 0.0]), None);
        let yy = vec![vec![true, true], vec![false, true]];
        assert_eq!(auc_macro(&yy, Some(&[vec![0.7, 0.1], vec![0.2, 0.3]])).unwrap(), Some(1.0));
        assert!(matches!(auc_macro(&yy, None), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn auc_of_noise_is_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let y: Vec<bool> = (0..10_000).map(|_| rng.gen_bool(0.3)).collect();
        let s: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
        assert!((auc_label(&y, &s).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn majority() {
        let col: Vec<bool> = (0..10).map(|i| i < 7).collect();
        assert_eq!(majority_class(&col).unwrap(), (true, 0.7));
        assert_eq!(majority_class(&[true, false]).unwrap(), (true, 0.5));
        assert!(majority_class(&[]).is_err());
        let same = vec![bits("1010"); 4];
        assert_eq!(majority_vector(&same).unwrap().1, 1.0);
        let b = baselines(&[bits("10"), bits("10"), bits("01")]).unwrap();
        assert!((b.vector - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.accuracy - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn aggregation() {
        let f = |acc: f64, auc: Option<f64>| FoldMetrics {
            auc,
            exact: 0.5,
            f_measure: 0.5,
            accuracy: acc,
            precision: 0.5,
            recall: 0.5,
            per_label: vec![acc, 1.0],
        };
        let r = EvalReport::aggregate(&[f(0.2, Some(0.6)), f(0.4, None)]).unwrap();
        assert!((r.accuracy.mean - 0.3).abs() < 1e-15);
        assert!((r.accuracy.sd - 0.02f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.auc, Some(MeanSd { mean: 0.6, sd: 0.0 }));
        assert!((r.per_label[0] - 0.3).abs() < 1e-15);
    }

    fn label_sets() -> impl Strategy<Value = (Vec<Vec<bool>>, Vec<Vec<bool>>)> {
        (1usize..30).prop_flat_map(|n| {
            (
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), n),
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), n),
            )
        })
    }

    proptest! {
        #[test]
        fn ranges_and_order((y, z) in label_sets()) {
            let acc = accuracy(&y, &z).unwrap();
            let ex = subset_accuracy(&y, &z).unwrap();
            for v in [acc, ex, precision(&y, &z).unwrap(), recall(&y, &z).unwrap(), f_measure(&y, &z).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(ex <= acc);
            let all_one = [acc, ex, precision(&y, &z).unwrap(), recall(&y, &z).unwrap(), f_measure(&y, &z).unwrap()]
                .iter().all(|&v| v == 1.0);
            prop_assert_eq!(all_one, y == z);
        }

        #[test]
        fn auc_monotone_invariant(
            rows in proptest::collection::vec((any::<bool>(), -5.0f64..5.0), 2..40)
        ) {
            let (y, s): (Vec<bool>, Vec<f64>) = rows.into_iter().unzip();
            let t: Vec<f64> = s.iter().map(|v| (v * 0.7).exp() + 3.0).collect();
            prop_assert_eq!(auc_label(&y, &s), auc_label(&y, &t));
        }
    }
}
