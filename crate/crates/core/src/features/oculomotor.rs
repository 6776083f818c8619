//! Fixation and saccade statistics over the history before a window.

use crate::gaze::{derive_saccades, Fixation};

use super::FeatureVector;

pub(crate) const NAMES: [&str; 8] = [
    "NFix", "TPromFix", "TMaxFix", "TMinFix", "NSac", "APromSac", "AMaxSac", "AMinSac",
];

fn count_mean_max_min(v: impl Iterator<Item = f64>) -> [f64; 4] {
    let (mut n, mut sum, mut max, mut min) = (0usize, 0.0, f64::NEG_INFINITY, f64::INFINITY);
    for x in v {
        n += 1;
        sum += x;
        max = max.max(x);
        min = min.min(x);
    }
    if n == 0 {
        [0.0; 4]
    } else {
        [n as f64, sum / n as f64, max, min]
    }
}

/// Counts plus mean/max/min of fixation durations and saccade amplitudes.
pub fn oculomotor_features(fixations: &[Fixation]) -> FeatureVector {
    let saccades = derive_saccades(fixations);
    let fix = count_mean_max_min(fixations.iter().map(|f| f.duration));
    let sac = count_mean_max_min(saccades.iter().map(|s| s.amplitude));
    let mut fv = FeatureVector::new();
    for (name, v) in NAMES.iter().zip(fix.iter().chain(&sac)) {
        fv.push(*name, *v);
    }
    fv.sorted()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix(cx: f64, t: f64, dur: f64) -> Fixation {
        Fixation {
            cx,
            cy: 0.0,
            t_start: t,
            duration: dur,
            sample_span: 0..1,
        }
    }

    #[test]
    fn empty_history() {
        let fv = oculomotor_features(&[]);
        assert_eq!(fv.len(), 8);
        assert!(fv.values().all(|v| v == 0.0));
    }

    #[test]
    fn durations() {
        let fv = oculomotor_features(&[fix(0.0, 0.0, 120.0), fix(0.0, 500.0, 180.0)]);
        assert_eq!(fv.get("NFix"), Some(2.0));
        assert_eq!(fv.get("TPromFix"), Some(150.0));
        assert_eq!(fv.get("TMaxFix"), Some(180.0));
        assert_eq!(fv.get("TMinFix"), Some(120.0));
    }

    #[test]
    fn amplitudes_agree_with_saccades() {
        let f = [fix(0.0, 0.0, 100.0), fix(5.0, 300.0, 100.0), fix(15.0, 600.0, 100.0)];
        let fv = oculomotor_features(&f);
        let sacc = derive_saccades(&f);
        let mean = sacc.iter().map(|s| s.amplitude).sum::<f64>() / sacc.len() as f64;
        assert_eq!(fv.get("NSac"), Some(2.0));
        assert_eq!(fv.get("APromSac"), Some(mean));
        assert!((mean - 7.5).abs() < 1e-12);
        assert_eq!(fv.get("AMaxSac"), Some(10.0));
        assert_eq!(fv.get("AMinSac"), Some(5.0));
    }
}
