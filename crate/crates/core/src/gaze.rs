//! Raw gaze signals and oculomotor event detection.
//!
//! Fixations are found with a dispersion-threshold (I-DT) detector: a
//! candidate window must span at least `min_duration_ms` and keep
//! `(max x - min x) + (max y - min y)` under `dispersion_px`; it then grows
//! sample by sample until the dispersion bound breaks. Invalid samples are
//! skipped, and a gap between valid samples longer than the blink threshold
//! splits candidates.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nominal sampling rate of the remote tracker.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub x: f64,
    pub y: f64,
    /// Milliseconds since session start.
    pub t: f64,
    pub valid: bool,
}

impl GazeSample {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        Self {
            x,
            y,
            t,
            valid: true,
        }
    }

    pub fn invalid(t: f64) -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            t,
            valid: false,
        }
    }
}

/// The visual record of one complete interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeSignal {
    pub user_id: String,
    pub session_id: String,
    pub samples: Vec<GazeSample>,
    pub sample_rate: f64,
}

impl GazeSignal {
    pub fn new(
        user_id: impl Into<String>,
        session_id: impl Into<String>,
        samples: Vec<GazeSample>,
    ) -> Result<Self> {
        let signal = Self {
            user_id: user_id.into(),
            session_id: session_id.into(),
            samples,
            sample_rate: DEFAULT_SAMPLE_RATE_HZ,
        };
        signal.validate()?;
        Ok(signal)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::EmptyInput("gaze signal has no samples"));
        }
        if let Some(first) = self.samples.first() {
            if !(first.t >= 0.0) {
                return Err(Error::MalformedSignal(format!(
                    "negative or NaN timestamp {}",
                    first.t
                )));
            }
        }
        for (i, pair) in self.samples.windows(2).enumerate() {
            if !(pair[1].t > pair[0].t) {
                return Err(Error::MalformedSignal(format!(
                    "timestamps not strictly increasing at sample {}: {} -> {}",
                    i + 1,
                    pair[0].t,
                    pair[1].t
                )));
            }
        }
        Ok(())
    }

    /// Session duration in milliseconds (time of the last sample).
    pub fn duration_ms(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Copy of this signal restricted to samples with `t < cutoff_ms`.
    pub fn prefix_before(&self, cutoff_ms: f64) -> GazeSignal {
        let end = self.samples.partition_point(|s| s.t < cutoff_ms);
        GazeSignal {
            user_id: self.user_id.clone(),
            session_id: self.session_id.clone(),
            samples: self.samples[..end].to_vec(),
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub cx: f64,
    pub cy: f64,
    pub t_start: f64,
    pub duration: f64,
    /// Index range into the source signal's samples.
    pub sample_span: Range<usize>,
}

impl Fixation {
    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saccade {
    pub from_fix: usize,
    pub to_fix: usize,
    pub amplitude: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixationParams {
    pub dispersion_px: f64,
    pub min_duration_ms: f64,
    /// Gaps between valid samples longer than this split candidates.
    pub blink_gap_ms: f64,
}

impl Default for FixationParams {
    fn default() -> Self {
        Self {
            dispersion_px: 30.0,
            min_duration_ms: 100.0,
            blink_gap_ms: 75.0,
        }
    }
}

impl FixationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dispersion_px > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dispersion_px must be > 0, got {}",
                self.dispersion_px
            )));
        }
        if !(self.min_duration_ms >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "min_duration_ms must be >= 0, got {}",
                self.min_duration_ms
            )));
        }
        if !(self.blink_gap_ms > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "blink_gap_ms must be > 0, got {}",
                self.blink_gap_ms
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct BBox {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl BBox {
    fn at(s: &GazeSample) -> Self {
        Self {
            min_x: s.x,
            max_x: s.x,
            min_y: s.y,
            max_y: s.y,
        }
    }

    fn grow(&mut self, s: &GazeSample) {
        self.min_x = self.min_x.min(s.x);
        self.max_x = self.max_x.max(s.x);
        self.min_y = self.min_y.min(s.y);
        self.max_y = self.max_y.max(s.y);
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Dispersion-threshold fixation detection.
pub fn detect_fixations(signal: &GazeSignal, params: &FixationParams) -> Result<Vec<Fixation>> {
    params.validate()?;
    signal.validate()?;

    let samples = &signal.samples;
    let mut fixations = Vec::new();
    for segment in valid_segments(samples, params.blink_gap_ms) {
        detect_in_segment(samples, &segment, params, &mut fixations);
    }
    Ok(fixations)
}

/// Splits the valid samples into runs whose consecutive gaps stay within
/// the blink threshold.
fn valid_segments(samples: &[GazeSample], blink_gap_ms: f64) -> Vec<Vec<usize>> {
    let mut segments = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if !s.valid {
            continue;
        }
        if let Some(&prev) = current.last() {
            if s.t - samples[prev].t > blink_gap_ms {
                segments.push(std::mem::take(&mut current));
            }
        }
        current.push(i);
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
}

fn detect_in_segment(
    samples: &[GazeSample],
    seg: &[usize],
    params: &FixationParams,
    out: &mut Vec<Fixation>,
) {
    let at = |k: usize| &samples[seg[k]];
    let mut i = 0;
    // `j` only moves forward, so the search for the first sample spanning
    // the minimum duration is amortised across start positions.
    let mut j = 0;
    while i < seg.len() {
        j = j.max(i);
        while j < seg.len() && at(j).t - at(i).t < params.min_duration_ms {
            j += 1;
        }
        if j >= seg.len() {
            break;
        }
        let mut bbox = BBox::at(at(i));
        for k in i + 1..=j {
            bbox.grow(at(k));
        }
        if bbox.dispersion() > params.dispersion_px {
            i += 1;
            continue;
        }
        let mut end = j;
        while end + 1 < seg.len() {
            let mut next = bbox;
            next.grow(at(end + 1));
            if next.dispersion() > params.dispersion_px {
                break;
            }
            bbox = next;
            end += 1;
        }
        let count = (end - i + 1) as f64;
        let (sx, sy) = (i..=end).fold((0.0, 0.0), |(sx, sy), k| (sx + at(k).x, sy + at(k).y));
        out.push(Fixation {
            cx: sx / count,
            cy: sy / count,
            t_start: at(i).t,
            duration: at(end).t - at(i).t,
            sample_span: seg[i]..seg[end] + 1,
        });
        i = end + 1;
    }
}

/// One saccade between every pair of consecutive fixations.
pub fn derive_saccades(fixations: &[Fixation]) -> Vec<Saccade> {
    fixations
        .windows(2)
        .enumerate()
        .map(|(k, pair)| Saccade {
            from_fix: k,
            to_fix: k + 1,
            amplitude: (pair[1].cx - pair[0].cx).hypot(pair[1].cy - pair[0].cy),
            duration: (pair[1].t_start - pair[0].t_end()).max(0.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 1000.0 / 120.0;

    fn signal(samples: Vec<GazeSample>) -> GazeSignal {
        GazeSignal::new("u", "s", samples).unwrap()
    }

    fn cluster(x: f64, y: f64, t0: f64, n: usize) -> Vec<GazeSample> {
        (0..n)
            .map(|k| GazeSample::new(x + (k % 3) as f64, y - (k % 2) as f64, t0 + k as f64 * DT))
            .collect()
    }

    #[test]
    fn single_stationary_cluster() {
        // 15 samples, 125 ms of recording.
        let s = signal(cluster(200.0, 300.0, 0.0, 15));
        let fix = detect_fixations(&s, &FixationParams::default()).unwrap();
        assert_eq!(fix.len(), 1);
        assert_eq!(fix[0].sample_span, 0..15);
        assert!(fix[0].duration >= 100.0);
    }

    #[test]
    fn short_cluster_is_filtered() {
        // 11 samples -> 83 ms span; 12 -> 91.7 ms. Both under 100 ms.
        let s = signal(cluster(200.0, 300.0, 0.0, 12));
        assert!(detect_fixations(&s, &FixationParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_clusters_joined_by_fast_samples() {
        // Hand trace: cluster A occupies samples 0..18, four transit samples
        // 18..22 each break dispersion, cluster B occupies 22..40.
        let mut samples: Vec<GazeSample> = (0..18)
            .map(|k| GazeSample::new(100.0, 100.0, k as f64 * DT))
            .collect();
        for (k, x) in [160.0, 220.0, 280.0, 340.0].into_iter().enumerate() {
            samples.push(GazeSample::new(x, 100.0, (18 + k) as f64 * DT));
        }
        for k in 22..40 {
            samples.push(GazeSample::new(400.0, 100.0, k as f64 * DT));
        }
        let fix = detect_fixations(&signal(samples), &FixationParams::default()).unwrap();
        assert_eq!(fix.len(), 2);
        assert_eq!(fix[0].sample_span, 0..18);
        assert_eq!(fix[1].sample_span, 22..40);
        assert_eq!((fix[0].cx, fix[0].cy), (100.0, 100.0));
        assert_eq!((fix[1].cx, fix[1].cy), (400.0, 100.0));
        assert!((fix[1].t_start - 22.0 * DT).abs() < 1e-9);
    }

    #[test]
    fn long_blink_splits_and_short_gap_is_bridged() {
        let mut samples = cluster(50.0, 50.0, 0.0, 15);
        // 50 ms of invalid samples: bridged.
        let mut t = 15.0 * DT;
        for _ in 0..6 {
            samples.push(GazeSample::invalid(t));
            t += DT;
        }
        samples.extend(cluster(50.0, 50.0, t, 5));
        let bridged = detect_fixations(&signal(samples.clone()), &FixationParams::default()).unwrap();
        assert_eq!(bridged.len(), 1);

        // 100 ms of invalid samples between two 90 ms pieces: split, both too short.
        let mut samples = cluster(50.0, 50.0, 0.0, 11);
        let mut t = 11.0 * DT;
        for _ in 0..12 {
            samples.push(GazeSample::invalid(t));
            t += DT;
        }
        samples.extend(cluster(50.0, 50.0, t, 11));
        let split = detect_fixations(&signal(samples), &FixationParams::default()).unwrap();
        assert!(split.is_empty());
    }

    #[test]
    fn error_paths() {
        let empty = GazeSignal {
            user_id: "u".into(),
            session_id: "s".into(),
            samples: vec![],
            sample_rate: 120.0,
        };
        assert!(matches!(
            detect_fixations(&empty, &FixationParams::default()),
            Err(Error::EmptyInput(_))
        ));
        let unordered = GazeSignal {
            samples: vec![GazeSample::new(0.0, 0.0, 10.0), GazeSample::new(0.0, 0.0, 5.0)],
            ..empty.clone()
        };
        assert!(matches!(
            detect_fixations(&unordered, &FixationParams::default()),
            Err(Error::MalformedSignal(_))
        ));
        let bad = FixationParams {
            dispersion_px: 0.0,
            ..Default::default()
        };
        let ok = signal(cluster(0.0, 0.0, 0.0, 3));
        assert!(matches!(
            detect_fixations(&ok, &bad),
            Err(Error::InvalidParameter(_))
        ));
    }

    fn fix_at(cx: f64, cy: f64, t: f64) -> Fixation {
        Fixation {
            cx,
            cy,
            t_start: t,
            duration: 150.0,
            sample_span: 0..1,
        }
    }

    #[test]
    fn saccade_counts_and_amplitude() {
        assert!(derive_saccades(&[]).is_empty());
        assert!(derive_saccades(&[fix_at(0.0, 0.0, 0.0)]).is_empty());
        let s = derive_saccades(&[fix_at(0.0, 0.0, 0.0), fix_at(3.0, 4.0, 200.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].amplitude, 5.0);
        assert_eq!(s[0].duration, 50.0);
        let five: Vec<_> = (0..5).map(|k| fix_at(k as f64, 0.0, k as f64 * 300.0)).collect();
        let s = derive_saccades(&five);
        assert_eq!(s.len(), 4);
        assert!(s.iter().enumerate().all(|(k, sac)| sac.from_fix == k && sac.to_fix == k + 1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn detected_fixations_respect_bounds(
                pts in prop::collection::vec((0.0f64..60.0, 0.0f64..60.0, any::<bool>()), 1..200),
                disp in 5.0f64..60.0,
                min_dur in 0.0f64..150.0,
            ) {
                let samples: Vec<GazeSample> = pts.iter().enumerate().map(|(k, &(x, y, v))| GazeSample {
                    x, y, t: k as f64 * DT, valid: v || k % 7 != 0,
                }).collect();
                let s = signal(samples);
                let params = FixationParams { dispersion_px: disp, min_duration_ms: min_dur, blink_gap_ms: 75.0 };
                let fix = detect_fixations(&s, &params).unwrap();
                for f in &fix {
                    prop_assert!(f.duration >= min_dur);
                    let valid: Vec<_> = s.samples[f.sample_span.clone()].iter().filter(|p| p.valid).collect();
                    let mut b = BBox::at(valid[0]);
                    for p in &valid { b.grow(p); }
                    prop_assert!(b.dispersion() <= disp + 1e-9);
                    prop_assert!(f.cx >= b.min_x - 1e-9 && f.cx <= b.max_x + 1e-9);
                    prop_assert!(f.cy >= b.min_y - 1e-9 && f.cy <= b.max_y + 1e-9);
                }
                prop_assert_eq!(derive_saccades(&fix).len(), fix.len().saturating_sub(1));
            }
        }
    }
}
