//! Fixation-history features per AOI and per page component.

use crate::gaze::Fixation;
use crate::layout::{Hit, Layout};
use crate::windowing::TimeWindow;

use super::FeatureVector;

/// Fixations detected strictly before a window opens, with their
/// resolution at onset.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub fixations: Vec<Fixation>,
    pub hits: Vec<Hit>,
}

impl History {
    fn in_window<'a>(&'a self, w: &'a TimeWindow) -> impl Iterator<Item = (&'a Fixation, &'a Hit)> + 'a {
        self.fixations
            .iter()
            .zip(&self.hits)
            .filter(move |(f, _)| w.contains(f.t_start))
    }
}

pub(crate) fn names(layout: &Layout) -> Vec<String> {
    let mut names = Vec::new();
    for j in 1..=layout.n() {
        for suffix in ["tslv", "r1", "r2", "r3", "end_r1"] {
            names.push(format!("AOI_{j}_{suffix}"));
        }
    }
    names.push("End_r1".into());
    for c in &layout.components {
        for suffix in ["his", "end", "end_r1", "tslv", "atv", "atbv"] {
            names.push(format!("{}_{suffix}", c.name));
        }
    }
    names
}

#[derive(Default, Clone)]
struct Visits {
    count: usize,
    last_onset: Option<f64>,
    total_duration: f64,
    total_gap: f64,
}

impl Visits {
    fn add(&mut self, f: &Fixation) {
        if let Some(prev) = self.last_onset {
            self.total_gap += f.t_start - prev;
        }
        self.count += 1;
        self.last_onset = Some(f.t_start);
        self.total_duration += f.duration;
    }
}

/// History features for window `t` (1-based).
///
/// Lag indicators `r1..r3` look at windows `t-1..t-3` individually (no
/// accumulation) and are 0 when the lag precedes the session. Time-since-last
/// visit is measured from the onset of the most recent fixation and is 0 for
/// never-visited targets.
pub fn fixation_history_features(
    history: &History,
    windows: &[TimeWindow],
    t: usize,
    layout: &Layout,
) -> FeatureVector {
    let n = layout.n();
    let t_open = windows[t - 1].t_start;

    let mut aoi_visits = vec![Visits::default(); n + 1];
    let mut comp_visits = vec![Visits::default(); layout.components.len() + 1];
    for (f, hit) in history.fixations.iter().zip(&history.hits) {
        if let Some(a) = hit.aoi {
            aoi_visits[a as usize].add(f);
        }
        if let Some(c) = hit.component {
            comp_visits[c as usize].add(f);
        }
    }

    let mut lags = vec![[false; 3]; n + 1];
    for q in 1..=3 {
        if t > q {
            for (_, hit) in history.in_window(&windows[t - 1 - q]) {
                if let Some(a) = hit.aoi {
                    lags[a as usize][q - 1] = true;
                }
            }
        }
    }
    let prev_end: Option<Hit> = if t >= 2 {
        history.in_window(&windows[t - 2]).last().map(|(_, h)| *h)
    } else {
        None
    };
    let end_aoi = prev_end.and_then(|h| h.aoi);
    let end_comp = prev_end.and_then(|h| h.component);

    let tslv = |v: &Visits| v.last_onset.map_or(0.0, |onset| t_open - onset);
    let bit = |b: bool| if b { 1.0 } else { 0.0 };

    let mut fv = FeatureVector::new();
    for j in 1..=n {
        let v = &aoi_visits[j];
        fv.push(format!("AOI_{j}_tslv"), tslv(v));
        for q in 1..=3 {
            fv.push(format!("AOI_{j}_r{q}"), bit(lags[j][q - 1]));
        }
        fv.push(format!("AOI_{j}_end_r1"), bit(end_aoi == Some(j as u32)));
    }
    fv.push("End_r1", end_aoi.map_or(0.0, |a| a as f64));
    for c in &layout.components {
        let v = &comp_visits[c.id as usize];
        let ended_here = end_comp == Some(c.id);
        fv.push(format!("{}_his", c.name), bit(v.count > 0));
        fv.push(
            format!("{}_end", c.name),
            if ended_here { c.id as f64 } else { 0.0 },
        );
        fv.push(format!("{}_end_r1", c.name), bit(ended_here));
        fv.push(format!("{}_tslv", c.name), tslv(v));
        fv.push(
            format!("{}_atv", c.name),
            if v.count > 0 {
                v.total_duration / v.count as f64
            } else {
                0.0
            },
        );
        fv.push(
            format!("{}_atbv", c.name),
            if v.count >= 2 {
                v.total_gap / (v.count - 1) as f64
            } else {
                0.0
            },
        );
    }
    fv.sorted()
}
