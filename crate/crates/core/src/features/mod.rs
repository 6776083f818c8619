//! Per-window predictive features.
//!
//! Three families are produced for window `t`, each using only data recorded
//! before the window opens:
//!
//! * fixation history per AOI and per page component, plus the population
//!   heat of each AOI at the same window index ([`history`], [`heat`]);
//! * visual kinematics of the raw gaze in window `t - 1` ([`kinematics`]);
//! * oculomotor statistics of all fixations and saccades so far
//!   ([`oculomotor`]).
//!
//! Column order is stable: alphabetical within each family, families in the
//! order above.

pub mod heat;
pub mod history;
pub mod kinematics;
pub mod oculomotor;

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gaze::{detect_fixations, FixationParams, GazeSignal};
use crate::layout::{Layout, PageTimeline};
use crate::windowing::{resolve_fixations, WindowedSession};

pub use heat::{fit_heat_model, HeatModel};
pub use history::{fixation_history_features, History};
pub use kinematics::kinematics_features;
pub use oculomotor::oculomotor_features;

/// Named feature values for one window, in a fixed order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.entries.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.entries.extend(other.entries);
    }

    pub(crate) fn sorted(mut self) -> Self {
        self.entries.sort_by(|a, b| a.0.cmp(&b.0));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Fixation,
    Kinematics,
    Oculomotor,
}

pub fn heat_name(aoi: u32) -> String {
    format!("Heat_AOI_{aoi}")
}

/// Column layout of the feature matrix for one page layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub names: Vec<String>,
    pub families: Vec<Family>,
    /// `(column, aoi)` for every heat column.
    pub heat_columns: Vec<(usize, u32)>,
}

impl FeatureSchema {
    pub fn new(layout: &Layout) -> Self {
        let mut fixation: Vec<String> = history::names(layout);
        fixation.extend((1..=layout.n() as u32).map(heat_name));
        fixation.sort();
        let mut kin = kinematics::NAMES.map(String::from).to_vec();
        kin.sort();
        let mut ocu = oculomotor::NAMES.map(String::from).to_vec();
        ocu.sort();

        let mut names = Vec::new();
        let mut families = Vec::new();
        for (fam, group) in [
            (Family::Fixation, fixation),
            (Family::Kinematics, kin),
            (Family::Oculomotor, ocu),
        ] {
            families.extend(std::iter::repeat(fam).take(group.len()));
            names.extend(group);
        }
        let heat_columns = (1..=layout.n() as u32)
            .map(|j| (names.iter().position(|n| *n == heat_name(j)).unwrap(), j))
            .collect();
        Self {
            names,
            families,
            heat_columns,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Places a feature vector's values into schema order; missing names are 0.
    pub fn row(&self, fv: &FeatureVector) -> Vec<f64> {
        let lookup: HashMap<&str, f64> = fv.entries.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        self.names
            .iter()
            .map(|n| lookup.get(n.as_str()).copied().unwrap_or(0.0))
            .collect()
    }

    /// Fills the heat columns of rows belonging to one session; row `r` is
    /// window index `r + 1`.
    pub fn apply_heat(&self, rows: &mut [Vec<f64>], model: &HeatModel) {
        for (r, row) in rows.iter_mut().enumerate() {
            for &(col, j) in &self.heat_columns {
                row[col] = model.heat(j, r + 1);
            }
        }
    }
}

/// Everything needed to extract causal features for one session.
pub struct SessionContext<'a> {
    pub signal: &'a GazeSignal,
    pub timeline: &'a PageTimeline,
    pub layout: &'a Layout,
    pub windowed: &'a WindowedSession,
    pub params: &'a FixationParams,
}

impl SessionContext<'_> {
    /// Fixations detected on the signal truncated at `cutoff_ms`, so nothing
    /// recorded at or after the cutoff can influence them.
    pub fn history_before(&self, cutoff_ms: f64) -> Result<History> {
        let prefix = self.signal.prefix_before(cutoff_ms);
        if prefix.samples.is_empty() {
            return Ok(History::default());
        }
        let fixations = detect_fixations(&prefix, self.params)?;
        let hits = resolve_fixations(&fixations, self.layout, self.timeline);
        Ok(History { fixations, hits })
    }

    /// All three families for window `t` (1-based). Heat columns are left
    /// at zero; they depend on the training fold.
    pub fn window_features(&self, t: usize) -> Result<FeatureVector> {
        let windows = &self.windowed.windows;
        let window = &windows[t - 1];
        let history = self.history_before(window.t_start)?;
        let mut fv = fixation_history_features(&history, windows, t, self.layout);
        let samples = if t >= 2 {
            let prev = &windows[t - 2];
            let lo = self.signal.samples.partition_point(|s| s.t < prev.t_start);
            let hi = self.signal.samples.partition_point(|s| s.t < prev.t_end);
            &self.signal.samples[lo..hi]
        } else {
            &[][..]
        };
        fv.extend(kinematics_features(samples));
        fv.extend(oculomotor_features(&history.fixations));
        Ok(fv)
    }

    /// Feature rows in schema order, one per window.
    pub fn feature_rows(&self, schema: &FeatureSchema) -> Result<Vec<Vec<f64>>> {
        (1..=self.windowed.len())
            .map(|t| self.window_features(t).map(|fv| schema.row(&fv)))
            .collect()
    }
}

/// Writes a feature matrix with its identifying columns.
pub fn write_feature_csv<W: Write>(
    out: W,
    schema: &FeatureSchema,
    keys: &[(String, String, usize)],
    rows: &[Vec<f64>],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["user_id".to_string(), "session_id".into(), "window".into()];
    header.extend(schema.names.iter().cloned());
    w.write_record(&header)?;
    for ((user, session, window), row) in keys.iter().zip(rows) {
        let mut rec = vec![user.clone(), session.clone(), window.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
