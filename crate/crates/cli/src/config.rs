//! The JSON run configuration shared by every command. Command-line flags
//! are applied on top of the parsed file, then the result is validated
//! before any computation starts.

use std::path::{Path, PathBuf};

use odm::estimate::InitRule;
use odm::grid::GridAxis;
use odm::io::Transform;
use odm::optim::OptimizerOptions;
use odm::{ModelKind, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: Option<String>,
    pub path: PathBuf,
    #[serde(default = "default_column")]
    pub column: String,
    #[serde(default)]
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x: GridAxis,
    pub y: GridAxis,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x: GridAxis::new("alpha", 0.01, 0.5, 101), y: GridAxis::new("beta", 0.01, 0.99, 101) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Parameter vector in the model's canonical order; fitted when absent.
    pub params: Option<Vec<f64>>,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub column: String,
    pub transform: Transform,
    /// Extra inputs for `report`; `data` is prepended when both are given.
    pub datasets: Vec<DatasetConfig>,
    pub delta: f64,
    pub alpha: f64,
    pub bandwidth: Option<usize>,
    pub n_starts: usize,
    pub constrained: bool,
    pub init: InitRule,
    pub grid: GridConfig,
    /// Initial values of the two filters compared by `diverge`.
    pub f0_pair: Option<[f64; 2]>,
    pub optimizer: OptimizerOptions,
    pub out: PathBuf,
}

fn default_column() -> String {
    "0".to_string()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::BetaTGarch,
            params: None,
            n: 2000,
            burn_in: odm::simulate::DEFAULT_BURN_IN,
            seed: 0,
            data: None,
            column: default_column(),
            transform: Transform::None,
            datasets: Vec::new(),
            delta: odm::invertibility::DEFAULT_DELTA,
            alpha: 0.05,
            bandwidth: None,
            n_starts: 8,
            constrained: false,
            init: InitRule::Default,
            grid: GridConfig::default(),
            f0_pair: None,
            optimizer: OptimizerOptions::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Values given on the command line; `None` keeps the config value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub column: Option<String>,
    pub transform: Option<Transform>,
    pub model: Option<ModelKind>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub bandwidth: Option<usize>,
    pub seed: Option<u64>,
    pub n_starts: Option<usize>,
    pub constrained: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(&path.display().to_string(), e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let at = e.path().to_string();
            CliError::config(if at == "." { "config" } else { &at }, e.inner())
        })
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        set!(column, transform, model, delta, alpha, seed, n_starts, out);
        if o.data.is_some() {
            self.data = o.data;
        }
        if o.bandwidth.is_some() {
            self.bandwidth = o.bandwidth;
        }
        self.constrained |= o.constrained;
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(CliError::config("delta", format!("must be positive, got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(CliError::config("alpha", format!("must lie in (0, 0.5), got {}", self.alpha)));
        }
        if self.n_starts == 0 {
            return Err(CliError::config("n_starts", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(CliError::config("n", "must be at least 1"));
        }
        if let Some(p) = &self.params {
            let spec = ModelSpec::from_vec(self.model, p).map_err(|e| CliError::config("params", e))?;
            spec.validate().map_err(|e| CliError::config("params", e))?;
        }
        for (name, axis) in [("grid.x", &self.grid.x), ("grid.y", &self.grid.y)] {
            if self.model.param_index(&axis.name).is_none() {
                return Err(CliError::config(&format!("{name}.name"), format!("{} has no parameter '{}'", self.model, axis.name)));
            }
            if !(axis.size >= 2 && axis.lo < axis.hi) {
                return Err(CliError::config(name, "needs lo < hi and size >= 2"));
            }
        }
        if self.grid.x.name == self.grid.y.name {
            return Err(CliError::config("grid", "axes must name two distinct parameters"));
        }
        if let InitRule::Scaled(s) | InitRule::Fixed(s) = self.init {
            if !s.is_finite() {
                return Err(CliError::config("init.value", "must be finite"));
            }
        }
        if let Some([a, b]) = self.f0_pair {
            if !(a.is_finite() && b.is_finite()) {
                return Err(CliError::config("f0_pair", "must be finite"));
            }
        }
        self.optimizer.validate().map_err(|e| CliError::config("optimizer", e))?;
        Ok(())
    }

    pub fn spec(&self) -> Option<ModelSpec<f64>> {
        self.params.as_ref().map(|p| ModelSpec::from_vec(self.model, p).expect("validated"))
    }

    /// Every dataset `report` should fit, the `data` entry first.
    pub fn all_datasets(&self) -> Vec<DatasetConfig> {
        let mut all = Vec::new();
        if let Some(path) = &self.data {
            all.push(DatasetConfig { name: None, path: path.clone(), column: self.column.clone(), transform: self.transform });
        }
        all.extend(self.datasets.iter().cloned());
        all
    }
}
