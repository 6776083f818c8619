use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{HyperGrid, ModelKind};
use crate::error::{Error, Result};
use crate::folds::FoldMode;
use crate::gaze::FixationParams;
use crate::layout::Layout;
use crate::selection::{Method, RfsParams};

/// Input files. Relative paths are resolved against the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusPaths {
    pub gaze: PathBuf,
    pub events: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: Option<CorpusPaths>,
    /// `None` uses the bundled news-page layout.
    pub layout: Option<PathBuf>,
    pub tau_s: f64,
    pub k_folds: usize,
    pub seed: u64,
    pub fold_mode: FoldMode,
    pub fixation: FixationParams,
    pub methods: Vec<Method>,
    pub models: Vec<ModelKind>,
    pub grid: HyperGrid,
    pub mlsmote_k: usize,
    pub rfs: RfsParams,
    pub sweep_taus: Vec<f64>,
    /// Repetitions per timed prediction; the fastest one is kept.
    pub timing_repeats: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            layout: None,
            tau_s: 5.0,
            k_folds: 10,
            seed: 0,
            fold_mode: FoldMode::Heuristic,
            fixation: FixationParams::default(),
            methods: Method::ALL.to_vec(),
            models: ModelKind::ALL.to_vec(),
            grid: HyperGrid::default(),
            mlsmote_k: 5,
            rfs: RfsParams::default(),
            sweep_taus: vec![3.0, 5.0, 10.0, 15.0, 20.0],
            timing_repeats: 3,
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("tau must be a positive number of seconds, got {tau}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(c) = cfg.corpus.as_mut() {
            resolve(&mut c.gaze);
            resolve(&mut c.events);
        }
        if let Some(l) = cfg.layout.as_mut() {
            resolve(l);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::Config(format!(
                "cross-validation needs at least 2 folds, got {}",
                self.k_folds
            )));
        }
        check_tau(self.tau_s)?;
        for &t in &self.sweep_taus {
            check_tau(t)?;
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no feature selection method configured".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no model configured".into()));
        }
        if self.mlsmote_k == 0 {
            return Err(Error::Config("mlsmote_k must be >= 1".into()));
        }
        if !(self.rfs.gamma > 0.0) || self.rfs.max_iter == 0 {
            return Err(Error::Config("rfs needs gamma > 0 and max_iter >= 1".into()));
        }
        if self.timing_repeats == 0 {
            return Err(Error::Config("timing_repeats must be >= 1".into()));
        }
        self.fixation
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.grid.validate()
    }

    pub fn load_layout(&self) -> Result<Layout> {
        match &self.layout {
            Some(p) => Layout::load(p),
            None => Ok(Layout::sample()),
        }
    }

    /// Largest feature count in the grid.
    pub fn m_max(&self) -> usize {
        self.grid.feature_counts.iter().copied().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.tau_s, 5.0);
        assert_eq!(c.k_folds, 10);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_and_names() {
        let c = ExperimentConfig::from_toml_str(
            "tau_s = 3.0\nmethods = [\"F-Score\", \"RFS\"]\nmodels = [\"RR-BR\", \"MLKNN\"]\n[grid]\nlambda = [0.5]\nknn_k = [5]\nsvm_c = [1.0]\nmlknn_k = 10\nfeature_counts = [5, 10]\n",
        )
        .unwrap();
        assert_eq!(c.methods, vec![Method::FScore, Method::Rfs]);
        assert_eq!(c.models.len(), 2);
        assert_eq!(c.m_max(), 10);
        assert_eq!(c.k_folds, 10);
    }

    #[test]
    fn guards() {
        for bad in [
            "k_folds = 1",
            "tau_s = 0.0",
            "sweep_taus = [3.0, -1.0]",
            "methods = []",
            "[grid]\nlambda = []\nknn_k = [5]\nsvm_c = [1.0]\nmlknn_k = 10\nfeature_counts = [5]",
            "unknown = 3",
            "models = [\"RR-XX\"]",
        ] {
            let e = ExperimentConfig::from_toml_str(bad).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{bad}: {e:?}");
        }
    }
}
