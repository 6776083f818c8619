//! Fixed-length time windows and their visit-intention labels.

use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaze::Fixation;
use crate::layout::{hit_test, Hit, InteractionEvent, Layout, PageTimeline};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    /// 1-based window index.
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl TimeWindow {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

/// Binary visit indicator per AOI for one window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitIntentionVector {
    pub window: usize,
    pub bits: Vec<bool>,
}

impl VisitIntentionVector {
    pub fn zeros(window: usize, n: usize) -> Self {
        Self {
            window,
            bits: vec![false; n],
        }
    }

    pub fn active(&self, aoi: u32) -> bool {
        aoi >= 1 && self.bits.get(aoi as usize - 1).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Tiles `[0, floor(T / tau) * tau)` with windows of length `tau_s` seconds;
/// the trailing residue of the session is dropped.
pub fn segment(duration_ms: f64, tau_s: f64) -> Result<Vec<TimeWindow>> {
    if !(tau_s > 0.0) || !tau_s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "window length must be > 0, got {tau_s}"
        )));
    }
    let tau_ms = tau_s * 1000.0;
    let count = (duration_ms.max(0.0) / tau_ms).floor() as usize;
    Ok((0..count)
        .map(|k| TimeWindow {
            index: k + 1,
            t_start: k as f64 * tau_ms,
            t_end: (k + 1) as f64 * tau_ms,
        })
        .collect())
}

/// Resolves each fixation to an AOI/component at its onset.
pub fn resolve_fixations(fixations: &[Fixation], layout: &Layout, timeline: &PageTimeline) -> Vec<Hit> {
    fixations
        .iter()
        .map(|f| hit_test(f.cx, f.cy, layout, &timeline.at(f.t_start)))
        .collect()
}

/// Indices of the fixations whose onset falls in `window`. `fixations` must be
/// ordered by onset.
pub fn fixations_in(fixations: &[Fixation], window: &TimeWindow) -> Range<usize> {
    let lo = fixations.partition_point(|f| f.t_start < window.t_start);
    let hi = fixations.partition_point(|f| f.t_start < window.t_end);
    lo..hi
}

fn label_from_hits(hits: &[Hit], n: usize, window: usize) -> VisitIntentionVector {
    let mut v = VisitIntentionVector::zeros(window, n);
    for aoi in hits.iter().filter_map(|h| h.aoi) {
        if let Some(b) = v.bits.get_mut(aoi as usize - 1) {
            *b = true;
        }
    }
    v
}

/// Bit `j` is set iff a fixation with onset in the window resolves to AOI `j`
/// under the page state at its onset.
pub fn label_window(
    fixations: &[Fixation],
    layout: &Layout,
    events: &[InteractionEvent],
    window: &TimeWindow,
) -> Result<VisitIntentionVector> {
    let timeline = PageTimeline::new(events, layout)?;
    let in_window: Vec<Fixation> = fixations
        .iter()
        .filter(|f| window.contains(f.t_start))
        .cloned()
        .collect();
    let hits = resolve_fixations(&in_window, layout, &timeline);
    Ok(label_from_hits(&hits, layout.n(), window.index))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowedSession {
    pub user_id: String,
    pub session_id: String,
    pub tau_s: f64,
    pub windows: Vec<TimeWindow>,
    pub fixations: Vec<Fixation>,
    /// Resolution of every fixation at its onset.
    pub hits: Vec<Hit>,
    /// Per window, the range of `fixations` with onset inside it.
    pub fixation_slices: Vec<Range<usize>>,
    pub labels: Vec<VisitIntentionVector>,
    /// Resolution of the last fixation with onset in each window.
    pub terminal: Vec<Option<Hit>>,
}

impl WindowedSession {
    pub fn build(
        user_id: &str,
        session_id: &str,
        duration_ms: f64,
        fixations: Vec<Fixation>,
        layout: &Layout,
        timeline: &PageTimeline,
        tau_s: f64,
    ) -> Result<Self> {
        let windows = segment(duration_ms, tau_s)?;
        let hits = resolve_fixations(&fixations, layout, timeline);
        let fixation_slices: Vec<Range<usize>> =
            windows.iter().map(|w| fixations_in(&fixations, w)).collect();
        let labels = windows
            .iter()
            .zip(&fixation_slices)
            .map(|(w, r)| label_from_hits(&hits[r.clone()], layout.n(), w.index))
            .collect();
        let terminal = fixation_slices
            .iter()
            .map(|r| r.clone().last().map(|k| hits[k]))
            .collect();
        Ok(Self {
            user_id: user_id.to_string(),
            session_id: session_id.to_string(),
            tau_s,
            windows,
            fixations,
            hits,
            fixation_slices,
            labels,
            terminal,
        })
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Writes `user_id,session_id,window,aoi_1,...,aoi_n`.
pub fn write_labels_csv<W: Write>(out: W, sessions: &[WindowedSession], n: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["user_id".to_string(), "session_id".into(), "window".into()];
    header.extend((1..=n).map(|j| format!("aoi_{j}")));
    w.write_record(&header)?;
    for s in sessions {
        for label in &s.labels {
            let mut row = vec![s.user_id.clone(), s.session_id.clone(), label.window.to_string()];
            row.extend(label.bits.iter().map(|&b| u8::from(b).to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
