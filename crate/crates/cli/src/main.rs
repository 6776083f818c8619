use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use aoi_intent::corpus::{Corpus, EVENTS_FILE, GAZE_FILE, LAYOUT_FILE};
use aoi_intent::pipeline::{
    emit_reports, load_inputs, run_experiment, sensitivity_sweep, timing_report, Bundle, CorpusPaths, ExperimentConfig,
    RunResult,
};
use aoi_intent::synth::{generate_cohort, BehaviorProfile};
use aoi_intent::Error;

/// Predict the areas of interest a web user will look at next, from
/// eye-tracking recordings and page interaction logs.
#[derive(Parser, Debug)]
#[command(name = "aoi-intent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cross-validated grid search at one window length.
    Run(Common),
    /// One full run per window length.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Window lengths in seconds; overrides `sweep_taus`.
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
    },
    /// Train and prediction wall-clock per model, single-threaded.
    Timing {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
    },
    /// Write a synthetic cohort (gaze.csv, events.csv, layout.toml).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 51)]
        users: usize,
        #[arg(long, default_value_t = 3)]
        sessions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Behaviour profile (TOML); missing keys keep the reference values.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Experiment config whose layout is used.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding gaze.csv, events.csv and optionally layout.toml;
    /// overrides the corpus paths of the config.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Window length in seconds.
    #[arg(long)]
    tau: Option<f64>,
    /// Number of cross-validation folds.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(dir) = &self.corpus {
            cfg.corpus = Some(CorpusPaths {
                gaze: dir.join(GAZE_FILE),
                events: dir.join(EVENTS_FILE),
            });
            let layout = dir.join(LAYOUT_FILE);
            if layout.exists() {
                cfg.layout = Some(layout);
            }
        }
        if let Some(t) = self.tau {
            cfg.tau_s = t;
        }
        if let Some(k) = self.folds {
            cfg.k_folds = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(run: &RunResult) {
    let b = &run.baselines;
    println!(
        "tau {} s: {} sessions, {} windows, {:.2} AOIs per window",
        run.tau_s, run.n_sessions, run.n_windows, run.label_density
    );
    println!("  majority class: Acc {:.3}, Exact {:.3}", b.accuracy, b.vector);
    match run.best_config() {
        Some(c) => {
            let r = &c.report;
            let auc = r.auc.map_or("-".to_string(), |a| format!("{:.3}", a.mean));
            println!(
                "  best: {} / {} / {} features / param {}: Acc {:.3}, Exact {:.3}, AUC {auc}",
                c.model, c.method, c.features, c.param, r.accuracy.mean, r.exact.mean
            );
        }
        None => println!("  no configuration was evaluated in every fold"),
    }
}

fn write(bundle: &Bundle, out: &Path) -> anyhow::Result<()> {
    let manifest = emit_reports(bundle, out)?;
    println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Run(common) => {
            let config = common.config()?;
            let (corpus, layout) = load_inputs(&config)?;
            let result = run_experiment(&corpus, &layout, &config)?;
            summarize(&result);
            let bundle = Bundle {
                config,
                runs: vec![result],
                timing: Vec::new(),
            };
            write(&bundle, &common.out)
        }
        Command::Sweep { common, taus } => {
            let config = common.config()?;
            let taus = taus.unwrap_or_else(|| config.sweep_taus.clone());
            let (corpus, layout) = load_inputs(&config)?;
            let runs = sensitivity_sweep(&corpus, &layout, &config, &taus)?;
            runs.iter().for_each(summarize);
            let bundle = Bundle {
                config,
                runs,
                timing: Vec::new(),
            };
            write(&bundle, &common.out)
        }
        Command::Timing { common, taus } => {
            let config = common.config()?;
            let taus = taus.unwrap_or_else(|| config.sweep_taus.clone());
            let (corpus, layout) = load_inputs(&config)?;
            let timing = timing_report(&corpus, &layout, &config, &taus)?;
            for row in &timing {
                println!(
                    "tau {:>4} {:<7} train {:>9.2} ms  test {:>8.3} ms  per window {:.4} ms{}",
                    row.tau_s,
                    row.model.to_string(),
                    row.train_ms.mean,
                    row.test_ms.mean,
                    row.per_window_ms,
                    if row.within_budget { "" } else { "  OVER BUDGET" }
                );
            }
            let bundle = Bundle {
                config,
                runs: Vec::new(),
                timing,
            };
            write(&bundle, &common.out)
        }
        Command::Synth {
            out,
            users,
            sessions,
            seed,
            profile,
            config,
        } => {
            let layout = match config {
                Some(p) => ExperimentConfig::load(&p)?.load_layout()?,
                None => ExperimentConfig::default().load_layout()?,
            };
            let profile = match profile {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| match e.kind() {
                        std::io::ErrorKind::NotFound => Error::MissingFile(p.clone()),
                        _ => Error::Io { path: p.clone(), source: e },
                    })?;
                    toml::from_str::<BehaviorProfile>(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                }
                None => BehaviorProfile::reference(),
            };
            let corpus: Corpus = generate_cohort(&layout, &profile, users, sessions, seed)?;
            corpus.save(&out, &layout)?;
            println!("wrote {} sessions of {users} users to {}", corpus.len(), out.display());
            Ok(())
        }
    }
}

/// Process exit code for a failure, by error kind.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InvalidParameter(_)) => 2,
        Some(Error::MissingFile(_)) => 3,
        Some(
            Error::MalformedCsv { .. } | Error::MalformedSignal(_) | Error::MalformedEvents(_) | Error::InvalidLayout(_),
        ) => 4,
        Some(Error::Io { .. }) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
