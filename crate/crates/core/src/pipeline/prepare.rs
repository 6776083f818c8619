use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::Result;
use crate::features::{fit_heat_model, FeatureSchema, HeatModel, SessionContext};
use crate::folds::FoldAssignment;
use crate::gaze::{detect_fixations, FixationParams};
use crate::layout::{Layout, PageTimeline};
use crate::windowing::WindowedSession;

#[derive(Debug, Clone)]
pub struct PreparedSession {
    /// Index into [`Prepared::users`].
    pub user: usize,
    pub windowed: WindowedSession,
    /// One row per window in schema order, heat columns still zero.
    pub rows: Vec<Vec<f64>>,
}

/// Windowed, labelled and featurized corpus for one window length.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub tau_s: f64,
    pub n_labels: usize,
    pub schema: FeatureSchema,
    /// Users with at least one window, sorted.
    pub users: Vec<String>,
    pub sessions: Vec<PreparedSession>,
}

/// Training and test matrices of one fold, heat filled from the training
/// sessions only.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub heat: HeatModel,
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<Vec<bool>>,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<Vec<bool>>,
}

pub fn prepare_session(
    record: &crate::corpus::SessionRecord,
    layout: &Layout,
    schema: &FeatureSchema,
    tau_s: f64,
    params: &FixationParams,
) -> Result<(WindowedSession, Vec<Vec<f64>>)> {
    let signal = &record.signal;
    let timeline = PageTimeline::new(&record.events, layout)?;
    let fixations = detect_fixations(signal, params)?;
    let windowed = WindowedSession::build(
        &signal.user_id,
        &signal.session_id,
        signal.duration_ms(),
        fixations,
        layout,
        &timeline,
        tau_s,
    )?;
    let ctx = SessionContext {
        signal,
        timeline: &timeline,
        layout,
        windowed: &windowed,
        params,
    };
    let rows = ctx.feature_rows(schema)?;
    Ok((windowed, rows))
}

pub fn prepare(corpus: &Corpus, layout: &Layout, tau_s: f64, params: &FixationParams) -> Result<Prepared> {
    let schema = FeatureSchema::new(layout);
    let built = corpus
        .sessions
        .par_iter()
        .map(|r| prepare_session(r, layout, &schema, tau_s, params))
        .collect::<Result<Vec<_>>>()?;
    let mut users: Vec<String> = corpus
        .sessions
        .iter()
        .zip(&built)
        .filter(|(_, (w, _))| !w.is_empty())
        .map(|(r, _)| r.signal.user_id.clone())
        .collect();
    users.sort();
    users.dedup();
    let skipped = corpus.len() - built.iter().filter(|(w, _)| !w.is_empty()).count();
    if skipped > 0 {
        log::info!("{skipped} sessions shorter than one {tau_s} s window are ignored");
    }
    let sessions = built
        .into_iter()
        .filter(|(w, _)| !w.is_empty())
        .map(|(windowed, rows)| PreparedSession {
            user: users.binary_search(&windowed.user_id).expect("collected above"),
            windowed,
            rows,
        })
        .collect();
    Ok(Prepared {
        tau_s,
        n_labels: layout.n(),
        schema,
        users,
        sessions,
    })
}

impl Prepared {
    pub fn n_windows(&self) -> usize {
        self.sessions.iter().map(|s| s.windowed.len()).sum()
    }

    pub fn windows_per_user(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.users.len()];
        for s in &self.sessions {
            w[s.user] += s.windowed.len() as u64;
        }
        w
    }

    /// Every window label, session by session.
    pub fn labels(&self) -> Vec<Vec<bool>> {
        self.sessions
            .iter()
            .flat_map(|s| s.windowed.labels.iter().map(|l| l.bits.clone()))
            .collect()
    }

    /// Mean number of active AOIs per window.
    pub fn label_density(&self) -> f64 {
        let y = self.labels();
        let total: usize = y.iter().map(|r| r.iter().filter(|&&b| b).count()).sum();
        total as f64 / y.len().max(1) as f64
    }

    fn rows_with_heat(&self, idx: &[usize], heat: &HeatModel) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &i in idx {
            let s = &self.sessions[i];
            let mut rows = s.rows.clone();
            self.schema.apply_heat(&mut rows, heat);
            x.extend(rows);
            y.extend(s.windowed.labels.iter().map(|l| l.bits.clone()));
        }
        (x, y)
    }

    pub fn fold_data(&self, assignment: &FoldAssignment, fold: usize) -> FoldData {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.sessions.len()).partition(|&i| assignment.folds[self.sessions[i].user] == fold);
        let train_sessions: Vec<&WindowedSession> = train.iter().map(|&i| &self.sessions[i].windowed).collect();
        let heat = fit_heat_model(&train_sessions, self.n_labels);
        let (train_x, train_y) = self.rows_with_heat(&train, &heat);
        let (test_x, test_y) = self.rows_with_heat(&test, &heat);
        FoldData {
            heat,
            train_x,
            train_y,
            test_x,
            test_y,
        }
    }

    /// All windows with heat fitted on the whole corpus; for descriptive
    /// reports only.
    pub fn full_data(&self) -> (Vec<Vec<f64>>, Vec<Vec<bool>>) {
        let all: Vec<&WindowedSession> = self.sessions.iter().map(|s| &s.windowed).collect();
        let heat = fit_heat_model(&all, self.n_labels);
        self.rows_with_heat(&(0..self.sessions.len()).collect::<Vec<_>>(), &heat)
    }
}
