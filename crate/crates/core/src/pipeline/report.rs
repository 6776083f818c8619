use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{best_of_family, better_report, ConfigResult, ExperimentConfig, RunResult, TimingRow};
use crate::classify::{Family, ModelKind};
use crate::error::{Error, Result};
use crate::folds::write_assignment_csv;
use crate::metrics::MeanSd;
use crate::selection::write_mi_csv;

/// Results to write: zero or more experiment runs and optional timings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
    pub timing: Vec<TimingRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub tau_s: f64,
    pub n_users: usize,
    pub n_sessions: usize,
    pub n_windows: usize,
    pub best: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub runs: Vec<RunSummary>,
    pub files: Vec<String>,
}

/// One line of the summary table: a model, a selection method and the
/// grid point chosen for them, with fold means and standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub selection: String,
    pub features: usize,
    pub param: f64,
    pub auc: Option<MeanSd>,
    pub exact: MeanSd,
    pub f_measure: MeanSd,
    pub accuracy: MeanSd,
    pub precision: MeanSd,
    pub recall: MeanSd,
}

impl MetricsRow {
    pub fn of(c: &ConfigResult) -> Self {
        let r = &c.report;
        Self {
            model: c.model.to_string(),
            selection: c.method.to_string(),
            features: c.features,
            param: c.param,
            auc: r.auc,
            exact: r.exact,
            f_measure: r.f_measure,
            accuracy: r.accuracy,
            precision: r.precision,
            recall: r.recall,
        }
    }
}

const METRIC_HEADER: [&str; 10] = ["model", "selection", "features", "param", "AUC", "Exact", "F", "Acc", "P", "R"];

fn cell(m: &MeanSd) -> String {
    format!("{} ({})", m.mean, m.sd)
}

fn parse_cell(s: &str) -> Option<MeanSd> {
    let (mean, rest) = s.trim().split_once(" (")?;
    let sd = rest.strip_suffix(')')?;
    Some(MeanSd {
        mean: mean.parse().ok()?,
        sd: sd.parse().ok()?,
    })
}

fn metric_cells(r: &MetricsRow) -> Vec<String> {
    vec![
        r.model.clone(),
        r.selection.clone(),
        r.features.to_string(),
        r.param.to_string(),
        r.auc.as_ref().map_or_else(|| "-".to_string(), cell),
        cell(&r.exact),
        cell(&r.f_measure),
        cell(&r.accuracy),
        cell(&r.precision),
        cell(&r.recall),
    ]
}

/// Summary table with `mean (sd)` cells; AUC is `-` for models without
/// confidences.
pub fn write_metrics_csv<W: Write>(out: W, rows: &[MetricsRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRIC_HEADER)?;
    for r in rows {
        w.write_record(metric_cells(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_metrics_csv`].
pub fn read_metrics_csv<R: Read>(input: R, path: &Path) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.iter().ne(METRIC_HEADER) {
        return Err(Error::csv(path, "unexpected metrics header"));
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = |what: &str| Error::csv(path, format!("record {}: bad {what}", k + 1));
        let ms = |i: usize, what: &str| parse_cell(&rec[i]).ok_or_else(|| bad(what));
        rows.push(MetricsRow {
            model: rec[0].to_string(),
            selection: rec[1].to_string(),
            features: rec[2].parse().map_err(|_| bad("features"))?,
            param: rec[3].parse().map_err(|_| bad("param"))?,
            auc: if &rec[4] == "-" { None } else { Some(ms(4, "AUC")?) },
            exact: ms(5, "Exact")?,
            f_measure: ms(6, "F")?,
            accuracy: ms(7, "Acc")?,
            precision: ms(8, "P")?,
            recall: ms(9, "R")?,
        });
    }
    Ok(rows)
}

struct Out {
    dir: PathBuf,
    root: PathBuf,
    files: Vec<String>,
}

impl Out {
    fn create(&mut self, name: &str) -> Result<(BufWriter<File>, PathBuf)> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let rel = path.strip_prefix(&self.root).unwrap_or(&path);
        self.files.push(rel.to_string_lossy().replace('\\', "/"));
        Ok((BufWriter::new(f), path))
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(BufWriter<File>) -> csv::Result<()>) -> Result<()> {
        let (w, path) = self.create(name)?;
        write(w).map_err(|e| Error::csv(&path, e))
    }
}

fn write_run(out: &mut Out, run: &RunResult) -> Result<()> {
    let table: Vec<MetricsRow> = run
        .best_by_model_method
        .iter()
        .map(|&i| MetricsRow::of(&run.configs[i]))
        .collect();
    out.csv("metrics.csv", |w| write_metrics_csv(w, &table))?;

    out.csv("configs.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "model", "selection", "features", "param", "auc_mean", "auc_sd", "exact_mean", "exact_sd", "f_mean",
            "f_sd", "acc_mean", "acc_sd", "p_mean", "p_sd", "r_mean", "r_sd",
        ])?;
        for c in &run.configs {
            let r = &c.report;
            let mut rec = vec![c.model.to_string(), c.method.to_string(), c.features.to_string(), c.param.to_string()];
            match r.auc {
                Some(a) => rec.extend([a.mean.to_string(), a.sd.to_string()]),
                None => rec.extend([String::new(), String::new()]),
            }
            for m in [r.exact, r.f_measure, r.accuracy, r.precision, r.recall] {
                rec.extend([m.mean.to_string(), m.sd.to_string()]);
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    })?;

    out.csv("baselines.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["metric", "value"])?;
        w.write_record(["Acc_MC", &run.baselines.accuracy.to_string()])?;
        w.write_record(["Exact_MC", &run.baselines.vector.to_string()])?;
        for (l, v) in run.baselines.per_label.iter().enumerate() {
            w.write_record([format!("AOI_{}_MC", l + 1), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;

    if let Some(best) = run.best_config() {
        out.csv("per_label.csv", |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["aoi", "accuracy", "mc"])?;
            for (l, acc) in best.report.per_label.iter().enumerate() {
                w.write_record([(l + 1).to_string(), acc.to_string(), run.baselines.per_label[l].to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?;
        out.csv("selected_features.csv", |w| {
            let mut w = csv::Writer::from_writer(w);
            w.write_record(["fold", "rank", "feature"])?;
            for (f, names) in run.selected_features.iter().enumerate() {
                for (r, n) in names.iter().enumerate() {
                    w.write_record([(f + 1).to_string(), (r + 1).to_string(), n.clone()])?;
                }
            }
            w.flush()?;
            Ok(())
        })?;
        out.csv("mi.csv", |w| write_mi_csv(w, &run.mi))?;
    }
    out.csv("folds.csv", |w| write_assignment_csv(w, &run.users, &run.assignment))?;
    Ok(())
}

fn tau_dir(tau: f64) -> String {
    format!("tau_{tau}")
}

fn write_sweep(out: &mut Out, runs: &[RunResult], models: &[ModelKind]) -> Result<()> {
    out.csv("sweep.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        let mut header = vec!["tau"];
        header.extend(METRIC_HEADER);
        w.write_record(&header)?;
        for run in runs {
            for &kind in models {
                let mut best: Option<&ConfigResult> = None;
                for c in run.configs.iter().filter(|c| c.model == kind) {
                    if best.map_or(true, |b| better_report(&c.report, &b.report)) {
                        best = Some(c);
                    }
                }
                if let Some(c) = best {
                    let mut rec = vec![run.tau_s.to_string()];
                    rec.extend(metric_cells(&MetricsRow::of(c)));
                    w.write_record(&rec)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("series.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "tau", "family", "auc", "exact", "f_measure", "accuracy", "precision", "recall", "label_density", "n_windows",
        ])?;
        for run in runs {
            for fam in Family::ALL {
                if let Some(c) = best_of_family(run, fam) {
                    let r = &c.report;
                    w.write_record([
                        run.tau_s.to_string(),
                        fam.as_str().to_string(),
                        r.auc.map_or(String::new(), |a| a.mean.to_string()),
                        r.exact.mean.to_string(),
                        r.f_measure.mean.to_string(),
                        r.accuracy.mean.to_string(),
                        r.precision.mean.to_string(),
                        r.recall.mean.to_string(),
                        run.label_density.to_string(),
                        run.n_windows.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })
}

fn write_timing(out: &mut Out, rows: &[TimingRow]) -> Result<()> {
    out.csv("timing.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "tau",
            "model",
            "selection",
            "features",
            "param",
            "train_ms_mean",
            "train_ms_sd",
            "test_ms_mean",
            "test_ms_sd",
            "test_windows_mean",
            "per_window_ms",
            "feature_ms_per_window",
            "within_budget",
        ])?;
        for r in rows {
            w.write_record([
                r.tau_s.to_string(),
                r.model.to_string(),
                r.method.to_string(),
                r.features.to_string(),
                r.param.to_string(),
                format!("{:.3}", r.train_ms.mean),
                format!("{:.3}", r.train_ms.sd),
                format!("{:.3}", r.test_ms.mean),
                format!("{:.3}", r.test_ms.sd),
                format!("{:.1}", r.test_windows),
                format!("{:.6}", r.per_window_ms),
                format!("{:.6}", r.feature_ms_per_window),
                r.within_budget.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

/// Writes the bundle under `dir` and returns the manifest. A single run
/// goes to the top level; several runs get one `tau_<s>` directory each plus
/// sweep tables. The manifest is always written.
pub fn emit_reports(bundle: &Bundle, dir: &Path) -> Result<Manifest> {
    let mut out = Out {
        dir: dir.to_path_buf(),
        root: dir.to_path_buf(),
        files: Vec::new(),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    match bundle.runs.as_slice() {
        [] => {}
        [run] => write_run(&mut out, run)?,
        runs => {
            for run in runs {
                out.dir = dir.join(tau_dir(run.tau_s));
                write_run(&mut out, run)?;
            }
            out.dir = dir.to_path_buf();
            write_sweep(&mut out, runs, &bundle.config.models)?;
        }
    }
    if !bundle.timing.is_empty() {
        write_timing(&mut out, &bundle.timing)?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: bundle.config.seed,
        config: bundle.config.clone(),
        runs: bundle
            .runs
            .iter()
            .map(|r| RunSummary {
                tau_s: r.tau_s,
                n_users: r.users.len(),
                n_sessions: r.n_sessions,
                n_windows: r.n_windows,
                best: r
                    .best_config()
                    .map(|c| format!("{} + {} (m = {}, param = {})", c.model, c.method, c.features, c.param)),
            })
            .collect(),
        files: out.files.clone(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(auc: Option<f64>) -> MetricsRow {
        let ms = |m: f64, s: f64| MeanSd { mean: m, sd: s };
        MetricsRow {
            model: "RR-CC".into(),
            selection: "F-Score".into(),
            features: 15,
            param: 0.75,
            auc: auc.map(|a| ms(a, 0.0123456789)),
            exact: ms(0.1 + 0.2, 1.0 / 3.0),
            f_measure: ms(0.5, 0.0),
            accuracy: ms(2.0f64.sqrt() / 2.0, 1e-17),
            precision: ms(1.0, 0.25),
            recall: ms(0.0, 0.0),
        }
    }

    #[test]
    fn metrics_round_trip() {
        let rows = vec![row(Some(0.843)), row(None)];
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("model,selection,features,param,AUC,Exact,F,Acc,P,R\n"));
        assert!(text.contains(",-,"));
        let back = read_metrics_csv(&buf[..], Path::new("m.csv")).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn bad_cells_rejected() {
        let text = "model,selection,features,param,AUC,Exact,F,Acc,P,R\nRR-BR,MLMIM,5,1,-,0.5,0.5 (0.1),0.5 (0.1),0.5 (0.1),0.5 (0.1)\n";
        assert!(matches!(
            read_metrics_csv(text.as_bytes(), Path::new("m.csv")),
            Err(Error::MalformedCsv { .. })
        ));
    }

    #[test]
    fn empty_bundle_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        let m = emit_reports(&Bundle::default(), dir.path()).unwrap();
        assert!(m.files.is_empty());
        let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(entries, vec!["manifest.json"]);
    }

    #[test]
    fn unwritable_destination() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        assert!(matches!(emit_reports(&Bundle::default(), &blocker.join("sub")), Err(Error::Io { .. })));
    }
}
