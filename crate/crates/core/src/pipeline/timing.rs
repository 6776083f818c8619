use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{assign, prepare, train_artifacts, ExperimentConfig};
use crate::classify::{ModelKind, MultiLabelModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::metrics::MeanSd;
use crate::selection::Method;

/// Wall-clock cost of one model at one window length, over the folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub tau_s: f64,
    pub model: ModelKind,
    pub method: Method,
    pub features: usize,
    pub param: f64,
    pub train_ms: MeanSd,
    /// Prediction of a whole test fold; fastest of the configured repeats.
    pub test_ms: MeanSd,
    pub test_windows: f64,
    pub per_window_ms: f64,
    /// Fixation detection, windowing and feature extraction per window.
    pub feature_ms_per_window: f64,
    /// Whether `per_window_ms` stays below the window length.
    pub within_budget: bool,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

/// Times every configured model at a mid-grid setting: the first selection
/// method, the median feature count and the middle parameter value.
/// Runs on a single worker so the numbers are comparable.
pub fn timing_report(corpus: &Corpus, layout: &Layout, config: &ExperimentConfig, taus: &[f64]) -> Result<Vec<TimingRow>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut rows = Vec::new();
        for &tau in taus {
            rows.extend(time_tau(corpus, layout, config, tau)?);
        }
        Ok(rows)
    })
}

fn time_tau(corpus: &Corpus, layout: &Layout, config: &ExperimentConfig, tau: f64) -> Result<Vec<TimingRow>> {
    let t0 = Instant::now();
    let prepared = prepare(corpus, layout, tau, &config.fixation)?;
    let feature_ms_per_window = ms(t0) / prepared.n_windows().max(1) as f64;
    let mut cfg = config.clone();
    cfg.tau_s = tau;
    let assignment = assign(&prepared, &cfg)?;

    let method = config.methods[0];
    let mut counts = config.grid.feature_counts.clone();
    counts.sort_unstable();
    let m = counts[counts.len() / 2].min(prepared.schema.len());

    // [model][fold] -> (train ms, test ms, test windows)
    let mut samples: Vec<Vec<(f64, f64, usize)>> = vec![Vec::new(); config.models.len()];
    for fold in 0..config.k_folds {
        let data = prepared.fold_data(&assignment, fold);
        let art = train_artifacts(&data, &prepared.schema.names, &cfg, fold, &[method])?;
        let cols = art.rankings[0].top(m).to_vec();
        let pick = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.into_iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
        };
        let train_x = pick(art.scaler.transform(&art.balanced.x));
        let test_x = pick(art.scaler.transform(&data.test_x));
        for (k, &kind) in config.models.iter().enumerate() {
            let params = config.grid.params(kind.family);
            let param = params[params.len() / 2];
            let t = Instant::now();
            let model = MultiLabelModel::fit(kind, param, &train_x, &art.balanced.y)?;
            let train_ms = ms(t);
            let mut test_ms = f64::INFINITY;
            for _ in 0..config.timing_repeats {
                let t = Instant::now();
                let pred = model.predict(&test_x);
                test_ms = test_ms.min(ms(t));
                std::hint::black_box(pred);
            }
            samples[k].push((train_ms, test_ms, test_x.len()));
        }
    }

    Ok(config
        .models
        .iter()
        .zip(samples)
        .map(|(&kind, s)| {
            let params = config.grid.params(kind.family);
            let train: Vec<f64> = s.iter().map(|v| v.0).collect();
            let test: Vec<f64> = s.iter().map(|v| v.1).collect();
            let per_window =
                s.iter().map(|v| v.1 / v.2.max(1) as f64).sum::<f64>() / s.len() as f64;
            TimingRow {
                tau_s: tau,
                model: kind,
                method,
                features: m,
                param: params[params.len() / 2],
                train_ms: MeanSd::of(&train).expect("k >= 2"),
                test_ms: MeanSd::of(&test).expect("k >= 2"),
                test_windows: s.iter().map(|v| v.2 as f64).sum::<f64>() / s.len() as f64,
                per_window_ms: per_window,
                feature_ms_per_window,
                within_budget: per_window < tau * 1000.0,
            }
        })
        .collect())
}
