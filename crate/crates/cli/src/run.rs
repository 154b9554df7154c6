use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::Serialize;

use sclab_core::funclass::RepresentationModel;
use sclab_core::objective::{self, write_trace_csv, Objective};
use sclab_core::par;
use sclab_core::posgraph::{connected_components, cross_cluster_mass};
use sclab_core::probe::{measure_assumptions, probe_model, theorem31_bound, ProbeRow};
use sclab_core::septest::{br_table, write_cells_csv, write_summary_csv};
use sclab_core::spectral::{eigendecompose, write_eigenfunctions_csv, write_spectrum_csv};
use sclab_core::synthdata::{example1_sign_targets, LabeledGraph};

use crate::config::{ExampleConfig, ExperimentConfig};
use crate::manifest::{self, Manifest};
use crate::Failure;

pub struct Context {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl Context {
    pub fn load_config(&self) -> Result<ExperimentConfig, Failure> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Failure::usage(anyhow::anyhow!("--config is required for this command")))?;
        let mut config = ExperimentConfig::load(path).map_err(Failure::Usage)?;
        self.apply_overrides(&mut config);
        Ok(config)
    }

    pub fn apply_overrides(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.train.seed = seed;
        }
    }

    pub fn out_dir(&self, config: &ExperimentConfig) -> Result<PathBuf, Failure> {
        let dir = self
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("sclab-out"));
        std::fs::create_dir_all(&dir)
            .with_context(|| format!("creating output directory {}", dir.display()))
            .map_err(Failure::Usage)?;
        Ok(dir)
    }

    pub fn finish(
        &self,
        dir: &Path,
        command: &str,
        config: &ExperimentConfig,
        seeds: Vec<u64>,
        outputs: &[&str],
    ) -> Result<(), Failure> {
        let json = serde_json::to_string(config)?;
        manifest::write(
            dir,
            &Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command,
                config_sha256: manifest::config_hash(&json),
                seeds,
                parallel: par::is_parallel(),
                jobs: self.jobs,
                outputs: outputs.iter().map(|s| s.to_string()).collect(),
            },
        )?;
        Ok(())
    }
}

pub fn build_graph(config: &ExperimentConfig) -> Result<LabeledGraph, Failure> {
    config.example.build().map_err(Failure::Usage)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

#[derive(Serialize)]
struct GraphInfo {
    n: usize,
    d: usize,
    components: usize,
    alpha: f64,
    spectrum_head: Vec<f64>,
}

pub fn graph_info(ctx: &Context) -> Result<bool, Failure> {
    let config = ctx.load_config()?;
    let lg = build_graph(&config)?;
    let graph = &lg.graph;
    let part = connected_components(graph);
    let head = eigendecompose(graph, graph.n().min(10))?;
    let info = GraphInfo {
        n: graph.n(),
        d: graph.dim(),
        components: part.m(),
        alpha: cross_cluster_mass(graph, &part)?,
        spectrum_head: head.eigenvalues,
    };
    println!("{}", serde_json::to_string(&info)?);
    let dir = ctx.out_dir(&config)?;
    write_json(&dir.join("graph_info.json"), &info)?;
    ctx.finish(&dir, "graph-info", &config, vec![], &["graph_info.json"])?;
    Ok(true)
}

pub fn spectrum(ctx: &Context) -> Result<bool, Failure> {
    let config = ctx.load_config()?;
    let lg = build_graph(&config)?;
    let count = config.eigen_count.min(lg.graph.n());
    let decomp = eigendecompose(&lg.graph, count)?;
    let dir = ctx.out_dir(&config)?;
    write_spectrum_csv(&decomp, create(&dir.join("spectrum.csv"))?)?;
    write_eigenfunctions_csv(&decomp, create(&dir.join("eigenfunctions.csv"))?)?;
    ctx.finish(&dir, "spectrum", &config, vec![], &["spectrum.csv", "eigenfunctions.csv"])?;
    Ok(true)
}

#[derive(Serialize)]
struct TrainSummary {
    class: sclab_core::funclass::ClassTag,
    k: usize,
    lambda: f64,
    seed: u64,
    loss: objective::LossReport,
    iterations: usize,
}

fn train_model(config: &ExperimentConfig, lg: &LabeledGraph) -> Result<objective::TrainResult, Failure> {
    let class = config.class_spec();
    class.shape_for(&lg.graph).map_err(Failure::usage)?;
    Ok(objective::train(
        &lg.graph,
        Objective::Population,
        &class,
        config.lambda,
        &config.train,
    )?)
}

fn start_seeds(config: &ExperimentConfig) -> Vec<u64> {
    let class = config.class_spec();
    let starts = config
        .train
        .starts
        .unwrap_or(if class.class.is_nonconvex() { 5 } else { 1 });
    (0..starts as u64).map(|s| config.train.seed.wrapping_add(s)).collect()
}

pub fn train(ctx: &Context) -> Result<bool, Failure> {
    let config = ctx.load_config()?;
    let lg = build_graph(&config)?;
    let result = train_model(&config, &lg)?;
    let dir = ctx.out_dir(&config)?;
    std::fs::write(dir.join("model.json"), result.model.to_json()? + "\n")?;
    write_trace_csv(&result.trace, create(&dir.join("trace.csv"))?)?;
    let summary = TrainSummary {
        class: result.model.class_tag(),
        k: result.model.out_dim(),
        lambda: config.lambda,
        seed: result.seed,
        loss: result.loss,
        iterations: result.trace.last().map_or(0, |r| r.iter),
    };
    println!("{}", serde_json::to_string(&summary)?);
    write_json(&dir.join("train.json"), &summary)?;
    ctx.finish(
        &dir,
        "train",
        &config,
        start_seeds(&config),
        &["model.json", "trace.csv", "train.json"],
    )?;
    Ok(true)
}

pub fn probe(ctx: &Context) -> Result<bool, Failure> {
    let config = ctx.load_config()?;
    let lg = build_graph(&config)?;
    let graph = &lg.graph;
    let (model, seeds) = match &config.model {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            (RepresentationModel::from_json(&text).map_err(Failure::usage)?, vec![])
        }
        None => (train_model(&config, &lg)?.model, start_seeds(&config)),
    };
    let targets = match &config.example {
        ExampleConfig::Example1(spec) => example1_sign_targets(graph, spec),
        _ => lg.onehots(),
    };
    let fit = probe_model(graph, &model, &targets).map_err(Failure::usage)?;
    let partition = lg.sets.clone().unwrap_or_else(|| connected_components(graph));
    let class = config.class_spec().with_k(model.out_dim());
    let report = measure_assumptions(graph, &partition, &class)?;
    let bound = if report.implementable {
        theorem31_bound(&report).ok()
    } else {
        None
    };
    let row = ProbeRow::new(
        config.example.kind(),
        model.class_tag(),
        model.out_dim(),
        config.lambda,
        fit.error,
        bound,
        report.to_map(),
    );
    println!("{}", row.to_json()?);
    let dir = ctx.out_dir(&config)?;
    write_json(&dir.join("probe.json"), &row)?;
    ctx.finish(&dir, "probe", &config, seeds, &["probe.json"])?;
    Ok(true)
}

pub fn br(ctx: &Context) -> Result<bool, Failure> {
    let config = ctx.load_config()?;
    let r_list = config.r_list.clone().unwrap_or_default();
    if r_list.is_empty() || r_list.contains(&0) {
        return Err(Failure::usage(anyhow::anyhow!("br needs a nonempty r_list of positive values")));
    }
    let lg = build_graph(&config)?;
    let classes = config.classes.clone().unwrap_or_else(|| vec![config.class_spec()]);
    let options = config.br_options();
    options.validate().map_err(Failure::usage)?;
    let report = br_table(&lg.graph, &classes, &r_list, &options)?;
    let dir = ctx.out_dir(&config)?;
    write_cells_csv(&report, create(&dir.join("br_cells.csv"))?)?;
    write_summary_csv(&report, create(&dir.join("br_summary.csv"))?)?;
    write_json(&dir.join("br.json"), &report)?;
    for row in &report.rows {
        println!(
            "{} r={} b_r={} oracle={}",
            row.class,
            row.r,
            row.b_r.map_or("none".to_string(), |v| format!("{v:.6e}")),
            row.oracle.map_or("-".to_string(), |v| format!("{v:.6e}"))
        );
    }
    let seeds = (0..options.seeds_per_cell as u64)
        .map(|s| options.train.seed.wrapping_add(s))
        .collect();
    ctx.finish(&dir, "br", &config, seeds, &["br_cells.csv", "br_summary.csv", "br.json"])?;
    Ok(true)
}
