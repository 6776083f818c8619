//! Cross-validated experiment: windowing, fold assignment, per-fold heat,
//! balancing, scaling, feature ranking, grid search and aggregation.

mod config;
mod grid;
mod prepare;
mod report;
mod timing;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{CorpusPaths, ExperimentConfig};
pub use prepare::{prepare, prepare_session, FoldData, Prepared, PreparedSession};
pub use report::{emit_reports, read_metrics_csv, write_metrics_csv, Bundle, Manifest, MetricsRow};
pub use timing::{timing_report, TimingRow};

use crate::balance::{mlsmote, Dataset, MlsmoteParams};
use crate::classify::{Family, ModelKind, Scaler};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::HeatModel;
use crate::folds::{assign_folds, FoldAssignment, FoldProblem};
use crate::layout::Layout;
use crate::metrics::{baselines, Baselines, EvalReport, FoldMetrics};
use crate::selection::{mi_report, rank_features_with, FeatureRanking, Method, MiEntry};
use crate::synth::session_seed;

use grid::{evaluate_grid, Columns};

/// Everything a fold learns from its training users.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldArtifacts {
    pub heat: HeatModel,
    pub balanced: Dataset,
    pub scaler: Scaler,
    pub rankings: Vec<FeatureRanking>,
}

/// One grid point aggregated over the folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub method: Method,
    pub model: ModelKind,
    pub features: usize,
    pub param: f64,
    pub report: EvalReport,
    pub folds: Vec<FoldMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub tau_s: f64,
    pub k_folds: usize,
    pub seed: u64,
    pub users: Vec<String>,
    pub assignment: FoldAssignment,
    pub n_sessions: usize,
    pub n_windows: usize,
    pub label_density: f64,
    /// Majority-class baselines over every window of the corpus.
    pub baselines: Baselines,
    pub configs: Vec<ConfigResult>,
    /// Index of the selected configuration.
    pub best: Option<usize>,
    /// Best configuration per (model, method), model-major.
    pub best_by_model_method: Vec<usize>,
    /// Feature names of the selected configuration, per fold.
    pub selected_features: Vec<Vec<String>>,
    pub mi: Vec<MiEntry>,
    /// False if any RFS fit stopped at its iteration cap.
    pub rfs_converged: bool,
}

impl RunResult {
    pub fn best_config(&self) -> Option<&ConfigResult> {
        self.best.map(|b| &self.configs[b])
    }
}

/// Higher mean accuracy, then subset accuracy, then precision.
pub fn better_report(a: &EvalReport, b: &EvalReport) -> bool {
    let key = |r: &EvalReport| [r.accuracy.mean, r.exact.mean, r.precision.mean];
    for (x, y) in key(a).iter().zip(key(b)) {
        match x.total_cmp(&y) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    session_seed(seed, u64::MAX - fold as u64, 0)
}

pub fn assign(prepared: &Prepared, config: &ExperimentConfig) -> Result<FoldAssignment> {
    let problem = FoldProblem::new(prepared.windows_per_user(), config.k_folds)?;
    if problem.users() < config.k_folds {
        return Err(Error::Config(format!(
            "{} folds requested but only {} users have windows",
            config.k_folds,
            problem.users()
        )));
    }
    assign_folds(&problem, config.fold_mode)
}

/// Feature counts of the grid that the schema can supply, ascending.
fn feature_counts(config: &ExperimentConfig, available: usize) -> Vec<usize> {
    let mut c: Vec<usize> = config
        .grid
        .feature_counts
        .iter()
        .map(|&m| m.min(available))
        .collect();
    c.sort_unstable();
    c.dedup();
    c
}

/// Balancing, scaling and ranking from a fold's training rows. Only the
/// methods listed are ranked.
pub fn train_artifacts(
    data: &FoldData,
    names: &[String],
    config: &ExperimentConfig,
    fold: usize,
    methods: &[Method],
) -> Result<FoldArtifacts> {
    let train = Dataset::new(data.train_x.clone(), data.train_y.clone())?;
    let balanced = mlsmote(
        &train,
        &MlsmoteParams {
            k: config.mlsmote_k,
            seed: fold_seed(config.seed, fold),
        },
    )?;
    let scaler = Scaler::fit(&balanced.x)?;
    let xs = scaler.transform(&balanced.x);
    let m = config.m_max().min(names.len());
    let rankings = methods
        .iter()
        .map(|&method| rank_features_with(method, &xs, &balanced.y, names, m, &config.rfs))
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldArtifacts {
        heat: data.heat.clone(),
        balanced,
        scaler,
        rankings,
    })
}

struct Point {
    method: usize,
    model: ModelKind,
    m: usize,
    param: usize,
}

fn grid_points(config: &ExperimentConfig, counts: &[usize]) -> Vec<Point> {
    let mut pts = Vec::new();
    for method in 0..config.methods.len() {
        for &model in &config.models {
            for &m in counts {
                for param in 0..config.grid.params(model.family).len() {
                    pts.push(Point { method, model, m, param });
                }
            }
        }
    }
    pts
}

fn run_fold(
    prepared: &Prepared,
    assignment: &FoldAssignment,
    config: &ExperimentConfig,
    fold: usize,
    points: &[Point],
    counts: &[usize],
) -> Result<(Vec<Option<FoldMetrics>>, FoldArtifacts)> {
    let data = prepared.fold_data(assignment, fold);
    if data.test_x.is_empty() || data.train_x.is_empty() {
        return Err(Error::Config(format!("fold {} has an empty side", fold + 1)));
    }
    let art = train_artifacts(&data, &prepared.schema.names, config, fold, &config.methods)?;
    let train_x = art.scaler.transform(&art.balanced.x);
    let test_x = art.scaler.transform(&data.test_x);
    let index: HashMap<(usize, ModelKind, usize, usize), usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| ((p.method, p.model, p.m, p.param), i))
        .collect();
    let mut out: Vec<Option<FoldMetrics>> = vec![None; points.len()];
    let mut failure: Option<Error> = None;
    for (mi, ranking) in art.rankings.iter().enumerate() {
        let cols = Columns::select(&train_x, &test_x, &ranking.features);
        let usable: Vec<usize> = counts.iter().copied().filter(|&m| m <= ranking.features.len()).collect();
        let mut sink = |model: ModelKind, m: usize, p: usize, pred: Result<crate::classify::Prediction>| {
            let i = index[&(mi, model, m, p)];
            match pred.and_then(|pr| FoldMetrics::compute(&data.test_y, &pr.bits, pr.confidence.as_deref())) {
                Ok(fm) => out[i] = Some(fm),
                Err(e) => {
                    log::warn!("fold {}: {model} m={m}: {e}", fold + 1);
                    failure.get_or_insert(e);
                }
            }
        };
        evaluate_grid(&cols, &art.balanced.y, &usable, &config.models, &config.grid, &mut sink);
    }
    if out.iter().all(Option::is_none) {
        return Err(failure.unwrap_or(Error::EmptyInput("no grid point could be evaluated")));
    }
    Ok((out, art))
}

/// Cross-validated grid search on an already prepared corpus.
pub fn run_prepared(prepared: &Prepared, config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let assignment = assign(prepared, config)?;
    let counts = feature_counts(config, prepared.schema.len());
    let points = grid_points(config, &counts);
    let per_fold = (0..config.k_folds)
        .into_par_iter()
        .map(|f| run_fold(prepared, &assignment, config, f, &points, &counts))
        .collect::<Result<Vec<_>>>()?;

    let mut configs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let folds: Option<Vec<FoldMetrics>> = per_fold.iter().map(|(f, _)| f[i].clone()).collect();
        // A point that failed in any fold is not comparable; leave it out.
        let Some(folds) = folds else { continue };
        configs.push(ConfigResult {
            method: config.methods[p.method],
            model: p.model,
            features: p.m,
            param: config.grid.params(p.model.family)[p.param],
            report: EvalReport::aggregate(&folds)?,
            folds,
        });
    }

    let pick = |filter: &dyn Fn(&ConfigResult) -> bool| -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, c) in configs.iter().enumerate().filter(|(_, c)| filter(c)) {
            if best.map_or(true, |b| better_report(&c.report, &configs[b].report)) {
                best = Some(i);
            }
        }
        best
    };
    let best = pick(&|_| true);
    let mut best_by_model_method = Vec::new();
    for &model in &config.models {
        for &method in &config.methods {
            best_by_model_method.extend(pick(&|c| c.model == model && c.method == method));
        }
    }

    let selected_features = match best {
        Some(b) => {
            let c = &configs[b];
            let mi = config.methods.iter().position(|&m| m == c.method).expect("configured");
            per_fold
                .iter()
                .map(|(_, art)| art.rankings[mi].names[..c.features.min(art.rankings[mi].names.len())].to_vec())
                .collect()
        }
        None => Vec::new(),
    };
    let rfs_converged = per_fold
        .iter()
        .flat_map(|(_, a)| &a.rankings)
        .all(|r| r.converged);

    let labels = prepared.labels();
    let mi = match best {
        Some(b) => {
            let (x, y) = prepared.full_data();
            let xs = Scaler::fit(&x)?.transform(&x);
            let m = config.m_max().min(prepared.schema.len());
            let ranking = rank_features_with(configs[b].method, &xs, &y, &prepared.schema.names, m, &config.rfs)?;
            mi_report(&ranking, &xs, &y)
        }
        None => Vec::new(),
    };

    Ok(RunResult {
        tau_s: prepared.tau_s,
        k_folds: config.k_folds,
        seed: config.seed,
        users: prepared.users.clone(),
        assignment,
        n_sessions: prepared.sessions.len(),
        n_windows: prepared.n_windows(),
        label_density: prepared.label_density(),
        baselines: baselines(&labels)?,
        configs,
        best,
        best_by_model_method,
        selected_features,
        mi,
        rfs_converged,
    })
}

/// Loads the corpus and layout named in the config.
pub fn load_inputs(config: &ExperimentConfig) -> Result<(Corpus, Layout)> {
    let paths = config
        .corpus
        .as_ref()
        .ok_or_else(|| Error::Config("no [corpus] paths configured".into()))?;
    let layout = config.load_layout()?;
    let corpus = Corpus::load(&paths.gaze, &paths.events)?;
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus has no sessions"));
    }
    Ok((corpus, layout))
}

pub fn run_experiment(corpus: &Corpus, layout: &Layout, config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let prepared = prepare(corpus, layout, config.tau_s, &config.fixation)?;
    run_prepared(&prepared, config)
}

/// One full experiment per window length.
pub fn sensitivity_sweep(corpus: &Corpus, layout: &Layout, config: &ExperimentConfig, taus: &[f64]) -> Result<Vec<RunResult>> {
    taus.iter()
        .map(|&tau| {
            let mut c = config.clone();
            c.tau_s = tau;
            run_experiment(corpus, layout, &c)
        })
        .collect()
}

/// Best configuration of one family, if any was evaluated.
pub fn best_of_family(run: &RunResult, family: Family) -> Option<&ConfigResult> {
    let mut best: Option<&ConfigResult> = None;
    for c in run.configs.iter().filter(|c| c.model.family == family) {
        if best.map_or(true, |b| better_report(&c.report, &b.report)) {
            best = Some(c);
        }
    }
    best
}
