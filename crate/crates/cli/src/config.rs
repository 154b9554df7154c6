//! Versioned experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use sclab_core::funclass::{ClassTag, FunctionClassSpec};
use sclab_core::objective::TrainConfig;
use sclab_core::posgraph::GraphFile;
use sclab_core::septest::{BrOptions, DEFAULT_LAMBDA_GRID, DEFAULT_SEEDS_PER_CELL};
use sclab_core::synthdata::{
    component_graph, example1_graph, example2_labels, example3_graph, example4_graph,
    random_graph, two_level_cluster_graph, ComponentGraphSpec, Example1Spec, Example3Spec,
    Example4Spec, LabeledGraph, SignLabelMap, TwoLevelSpec,
};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example2Config {
    pub d: usize,
    pub s: usize,
    pub tau_grid: Vec<f64>,
    pub label_map: SignLabelMap,
}

impl Example2Config {
    pub fn spec(&self) -> Example1Spec {
        Example1Spec::new(self.d, self.s, self.tau_grid.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGraphConfig {
    pub n: usize,
    pub components: usize,
    pub density: f64,
    pub d: usize,
    pub seed: u64,
}

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleConfig {
    Example1(Example1Spec),
    Example2(Example2Config),
    Example3(Example3Spec),
    Example4(Example4Spec),
    TwoLevel(TwoLevelSpec),
    Components(ComponentGraphSpec),
    Random(RandomGraphConfig),
    /// Path to a graph file, relative to the config file.
    GraphFile(PathBuf),
}

impl ExampleConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExampleConfig::Example1(_) => "example1",
            ExampleConfig::Example2(_) => "example2",
            ExampleConfig::Example3(_) => "example3",
            ExampleConfig::Example4(_) => "example4",
            ExampleConfig::TwoLevel(_) => "two_level",
            ExampleConfig::Components(_) => "components",
            ExampleConfig::Random(_) => "random",
            ExampleConfig::GraphFile(_) => "graph_file",
        }
    }

    pub fn build(&self) -> anyhow::Result<LabeledGraph> {
        Ok(match self {
            ExampleConfig::Example1(s) => example1_graph(s)?,
            ExampleConfig::Example2(c) => example2_labels(&c.spec(), &c.label_map)?,
            ExampleConfig::Example3(s) => example3_graph(s)?,
            ExampleConfig::Example4(s) => example4_graph(s)?,
            ExampleConfig::TwoLevel(s) => two_level_cluster_graph(s)?,
            ExampleConfig::Components(s) => component_graph(s)?,
            ExampleConfig::Random(c) => {
                let graph = random_graph(c.n, c.components, c.density, c.d, c.seed)?;
                let n = graph.n();
                LabeledGraph::new(graph, vec![0; n], 1)?
            }
            ExampleConfig::GraphFile(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading graph file {}", path.display()))?;
                let file: GraphFile = serde_json::from_str(&text)
                    .with_context(|| format!("parsing graph file {}", path.display()))?;
                LabeledGraph::from_file(&file)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub example: ExampleConfig,
    #[serde(default)]
    pub class: Option<FunctionClassSpec>,
    /// Overrides the class output dimension.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub r_list: Option<Vec<usize>>,
    #[serde(default)]
    pub classes: Option<Vec<FunctionClassSpec>>,
    #[serde(default)]
    pub seeds_per_cell: Option<usize>,
    #[serde(default)]
    pub train: TrainConfig,
    /// Number of eigenpairs for `spectrum`.
    #[serde(default = "default_eigen_count")]
    pub eigen_count: usize,
    /// Model file to probe instead of training one.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_eigen_count() -> usize {
    10
}

impl ExperimentConfig {
    pub fn new(example: ExampleConfig) -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            example,
            class: None,
            k: None,
            lambda: default_lambda(),
            lambda_grid: None,
            r_list: None,
            classes: None,
            seeds_per_cell: None,
            train: TrainConfig::default(),
            eigen_count: default_eigen_count(),
            model: None,
            output_dir: None,
        }
    }

    /// Parse and validate; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!("config error at line {}, column {}: {e}", e.line(), e.column())
        })?;
        if config.version != CONFIG_VERSION {
            bail!("unsupported config version {} (expected {CONFIG_VERSION})", config.version);
        }
        if let ExampleConfig::GraphFile(path) = &mut config.example {
            if path.is_relative() {
                *path = base.join(&*path);
            }
            if !path.exists() {
                bail!("graph file {} does not exist", path.display());
            }
        }
        if let Some(model) = &mut config.model {
            if model.is_relative() {
                *model = base.join(&*model);
            }
            if !model.exists() {
                bail!("model file {} does not exist", model.display());
            }
        }
        if !(config.lambda > 0.0) {
            bail!("lambda must be positive");
        }
        config.train.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn class_spec(&self) -> FunctionClassSpec {
        let base = self.class.clone().unwrap_or_else(|| FunctionClassSpec::new(ClassTag::Tabular, 2));
        match self.k {
            Some(k) => base.with_k(k),
            None => base,
        }
    }

    pub fn br_options(&self) -> BrOptions {
        BrOptions {
            lambda_grid: self.lambda_grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec()),
            seeds_per_cell: self.seeds_per_cell.unwrap_or(DEFAULT_SEEDS_PER_CELL),
            train: self.train.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let text = r#"{"version": 1, "example": {"example1": {"d": 3, "s": 1, "tau_grid": [0.5, 1.0]}}}"#;
        let c = ExperimentConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(c.example.kind(), "example1");
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.class_spec().class, ClassTag::Tabular);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = "{\"version\": 1,\n \"exmple\": 3}";
        let e = ExperimentConfig::parse(text, Path::new(".")).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let nested = r#"{"version": 1, "example": {"example1": {"d": 3, "s": 1, "tau_grid": [1.0], "typo": 1}}}"#;
        assert!(ExperimentConfig::parse(nested, Path::new(".")).is_err());
    }

    #[test]
    fn wrong_version_rejected() {
        let text = r#"{"version": 2, "example": {"random": {"n": 3, "components": 1, "density": 0.5, "d": 1, "seed": 0}}}"#;
        assert!(ExperimentConfig::parse(text, Path::new(".")).is_err());
    }

    #[test]
    fn missing_graph_file_rejected() {
        let text = r#"{"version": 1, "example": {"graph_file": "does-not-exist.json"}}"#;
        assert!(ExperimentConfig::parse(text, Path::new("/nonexistent")).is_err());
    }
}
