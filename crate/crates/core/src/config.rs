//! Experiment configuration: one TOML document per experiment.
//!
//! ```toml
//! seed = 7
//! out = "runs/demo"
//!
//! [world]
//! concept_count = 300
//! zipf_exponent = 1.0
//! sentence_len = [4, 10]
//!
//! [data]
//! dev_size = 500
//! test_size = 500
//! graph = "graph.toml"        # relative to this file; or use [graph] inline
//!
//! [run]
//! tau = 0.1
//! max_hops = 2
//! ```
//!
//! Scalar fields can be overridden by `GD_*` environment variables (see
//! [`ENV_OVERRIDES`]); command-line flags override both.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, LanguageGraph};
use crate::orchestrator::RunConfig;
use crate::remote::RemoteConfig;
use crate::world::WorldConfig;

pub const ENV_PREFIX: &str = "GD_";

/// Environment variables honoured by [`ExperimentConfig::apply_env`].
pub const ENV_OVERRIDES: [&str; 13] = [
    "GD_SEED",
    "GD_OUT",
    "GD_CONCEPT_COUNT",
    "GD_ZIPF_EXPONENT",
    "GD_DEV_SIZE",
    "GD_TEST_SIZE",
    "GD_TAU",
    "GD_MAX_HOPS",
    "GD_EDGES_PER_ITER",
    "GD_TOP_K",
    "GD_DELTA",
    "GD_MAX_ITERATIONS",
    "GD_BUDGET",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "default_eval_size")]
    pub dev_size: usize,
    #[serde(default = "default_eval_size")]
    pub test_size: usize,
    /// Graph spec file, relative to the config file.
    #[serde(default)]
    pub graph: Option<PathBuf>,
}

fn default_eval_size() -> usize {
    500
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { dev_size: default_eval_size(), test_size: default_eval_size(), graph: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory; data goes to `<out>/data`, runs to `<out>/runs/<mode>`.
    pub out: PathBuf,
    #[serde(default)]
    pub world: WorldConfig,
    #[serde(default)]
    pub data: DataConfig,
    /// Inline topology, used when `data.graph` is absent.
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub remote: Option<RemoteConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(field_of(&e), e.message()))?;
        cfg.base_dir = base_dir.to_path_buf();
        if cfg.out.is_relative() {
            cfg.out = base_dir.join(&cfg.out);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    /// Applies `GD_*` overrides from `lookup` (normally `std::env::var`).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        fn parse<T: std::str::FromStr>(name: &str, v: &str) -> Result<T> {
            v.trim().parse().map_err(|_| Error::config(name, format!("cannot parse `{v}`")))
        }
        for name in ENV_OVERRIDES {
            let Some(v) = lookup(name) else { continue };
            match name {
                "GD_SEED" => {
                    self.seed = parse(name, &v)?;
                }
                "GD_OUT" => self.out = PathBuf::from(v),
                "GD_CONCEPT_COUNT" => self.world.concept_count = parse(name, &v)?,
                "GD_ZIPF_EXPONENT" => self.world.zipf_exponent = parse(name, &v)?,
                "GD_DEV_SIZE" => self.data.dev_size = parse(name, &v)?,
                "GD_TEST_SIZE" => self.data.test_size = parse(name, &v)?,
                "GD_TAU" => self.run.tau = parse(name, &v)?,
                "GD_MAX_HOPS" => self.run.max_hops = parse(name, &v)?,
                "GD_EDGES_PER_ITER" => self.run.edges_per_iter = parse(name, &v)?,
                "GD_TOP_K" => self.run.top_k = parse(name, &v)?,
                "GD_DELTA" => self.run.delta = parse(name, &v)?,
                "GD_MAX_ITERATIONS" => self.run.max_iterations = parse(name, &v)?,
                "GD_BUDGET" => self.run.budget = parse(name, &v)?,
                _ => unreachable!("listed override"),
            }
        }
        Ok(())
    }

    /// The run seed follows the experiment seed.
    pub fn sync_seed(&mut self) {
        self.run.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        if self.data.dev_size == 0 {
            return Err(Error::config("data.dev_size", "must be at least 1"));
        }
        if self.data.test_size == 0 {
            return Err(Error::config("data.test_size", "must be at least 1"));
        }
        if self.data.graph.is_none() && self.graph.is_none() {
            return Err(Error::config("graph", "set data.graph or an inline [graph] table"));
        }
        self.run.validate()
    }

    pub fn graph(&self) -> Result<LanguageGraph> {
        match (&self.data.graph, &self.graph) {
            (Some(p), _) => {
                let path = self.base_dir.join(p);
                if !path.exists() {
                    return Err(Error::config("data.graph", format!("{} does not exist", path.display())));
                }
                LanguageGraph::load(&path)
            }
            (None, Some(spec)) => LanguageGraph::from_spec(spec),
            (None, None) => Err(Error::config("graph", "no topology given")),
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out.join("data")
    }

    pub fn run_dir(&self, mode: &str) -> PathBuf {
        self.out.join("runs").join(mode)
    }
}

fn field_of(e: &toml::de::Error) -> String {
    // toml reports unknown keys and type errors with the key in the message
    let msg = e.message();
    if let Some(start) = msg.find('`') {
        if let Some(len) = msg[start + 1..].find('`') {
            return msg[start + 1..start + 1 + len].to_owned();
        }
    }
    "config".to_owned()
}
