//! Run configuration, read from TOML.
//!
//! Every table is optional and falls back to the defaults below; unknown keys are errors.
//!
//! ```toml
//! seed = 7                  # global seed; FAULTLAB_SEED is used when absent
//!
//! [paths]
//! datasets = "data"         # generated CSVs
//! models = "models"         # one checkpoint directory per variant
//! reports = "reports"
//!
//! [data]
//! scale = "desk"            # or "full" for the original capture sizes
//! mixed = 50000             # optional per-regime overrides
//!
//! [sim]                     # simulator settings; length and seed are set per regime
//! fault_rate = 0.01
//!
//! [cascade]                 # detector, segment classifier, prior, task2, task3
//! [cascade.task3]
//! hidden = [32, 32]
//!
//! [eval]
//! folds = 10
//! plan_seed = 7             # defaults to a seed derived from the global one
//! variants = ["full", "b2", "b3"]
//! ```

use std::path::{Path, PathBuf};

use faultlab_core::cascade::{CascadeConfig, Variant};
use faultlab_core::seed::stage_seed;
use faultlab_core::sim::{DatasetSizes, Regime, SimConfig};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "FAULTLAB_SEED";
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("{SEED_ENV}=`{0}` is not an unsigned integer")]
    SeedEnv(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub datasets: PathBuf,
    pub models: PathBuf,
    pub reports: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            datasets: "data".into(),
            models: "models".into(),
            reports: "reports".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Desk,
    Full,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub scale: Scale,
    pub anomaly_only: Option<usize>,
    pub normal_only: Option<usize>,
    pub mixed: Option<usize>,
}

impl DataConfig {
    pub fn sizes(&self) -> DatasetSizes {
        let base = match self.scale {
            Scale::Desk => DatasetSizes::desk(),
            Scale::Full => DatasetSizes::full(),
        };
        DatasetSizes {
            anomaly_only: self.anomaly_only.unwrap_or(base.anomaly_only),
            normal_only: self.normal_only.unwrap_or(base.normal_only),
            mixed: self.mixed.unwrap_or(base.mixed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub folds: usize,
    pub plan_seed: Option<u64>,
    pub variants: Vec<Variant>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            plan_seed: None,
            variants: Variant::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub paths: Paths,
    pub data: DataConfig,
    pub sim: SimConfig,
    pub cascade: CascadeConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.display().to_string(),
            source: Box::new(e),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Defaults when `path` is `None`.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("[sim]: {e}")))?;
        if self.eval.folds == 0 {
            return Err(ConfigError::Invalid("[eval] folds must be positive".into()));
        }
        if self.eval.variants.is_empty() {
            return Err(ConfigError::Invalid("[eval] variants must not be empty".into()));
        }
        let sizes = self.data.sizes();
        if sizes.anomaly_only == 0 || sizes.normal_only == 0 || sizes.mixed == 0 {
            return Err(ConfigError::Invalid("[data] sizes must be positive".into()));
        }
        Ok(())
    }

    /// Flag, then config file, then `FAULTLAB_SEED`, then [`DEFAULT_SEED`].
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, ConfigError> {
        resolve_seed(flag.or(self.seed))
    }

    pub fn plan_seed(&self, global: u64) -> u64 {
        self.eval.plan_seed.unwrap_or_else(|| stage_seed(global, "plan"))
    }

    /// Simulator settings for one regime of a pipeline run.
    pub fn sim_for(&self, regime: Regime, global: u64) -> SimConfig {
        SimConfig {
            length: self.data.sizes().for_regime(regime),
            seed: stage_seed(global, &format!("sim/{}", regime.name())),
            ..self.sim.clone()
        }
    }
}

/// `explicit`, else `FAULTLAB_SEED`, else [`DEFAULT_SEED`].
pub fn resolve_seed(explicit: Option<u64>) -> Result<u64, ConfigError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| ConfigError::SeedEnv(v)),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml("", Path::new("run.toml")).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.data.sizes(), DatasetSizes::desk());
        assert_eq!(cfg.eval.variants, Variant::ALL.to_vec());
    }

    #[test]
    fn nested_overrides_keep_other_defaults() {
        let text = r#"
            seed = 3
            [data]
            mixed = 1200
            [cascade.task3]
            hidden = [8]
            [eval]
            folds = 4
            variants = ["b2"]
        "#;
        let cfg = RunConfig::from_toml(text, Path::new("run.toml")).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.data.sizes().mixed, 1200);
        assert_eq!(cfg.data.sizes().normal_only, 50_000);
        assert_eq!(cfg.cascade.task3.hidden, vec![8]);
        assert_eq!(cfg.cascade.task3.chunk_len, CascadeConfig::default().task3.chunk_len);
        assert_eq!(cfg.eval.variants, vec![Variant::B2NoCpd]);
    }

    #[test]
    fn bad_files_are_rejected() {
        for text in ["sed = 1", "[eval]\nfolds = 0", "[sim]\nfault_rate = 2.0", "seed = \"x\""] {
            assert!(RunConfig::from_toml(text, Path::new("bad.toml")).is_err(), "{text}");
        }
    }

    #[test]
    fn regime_seeds_differ() {
        let cfg = RunConfig::default();
        let a = cfg.sim_for(Regime::NormalOnly, 1);
        let b = cfg.sim_for(Regime::Mixed, 1);
        assert_ne!(a.seed, b.seed);
        assert_eq!(a.length, 50_000);
    }

    #[test]
    fn defaults_serialise_to_toml() {
        let text = toml::to_string(&RunConfig::default()).unwrap();
        assert_eq!(RunConfig::from_toml(&text, Path::new("x.toml")).unwrap(), RunConfig::default());
    }
}
