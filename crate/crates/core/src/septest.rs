//! Empirical r-way separability `b_r` of a function class on a graph.
//!
//! For each λ on a grid a model with `k = r` outputs is trained on the
//! contrastive loss, whitened to covariance `I / r`, and scored by its
//! positive-pair discrepancy. `b_r` is the smallest score over the grid.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funclass::{forward_points, ClassTag, FunctionClassSpec};
use crate::objective::{covariance, train_single, whiten, Objective, TrainConfig};
use crate::par;
use crate::posgraph::PositivePairGraph;
use crate::spectral::{eigendecompose, pair_discrepancy_values};

pub const DEFAULT_LAMBDA_GRID: [f64; 9] = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0];

pub const DEFAULT_SEEDS_PER_CELL: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrOptions {
    pub lambda_grid: Vec<f64>,
    pub seeds_per_cell: usize,
    pub train: TrainConfig,
}

impl Default for BrOptions {
    fn default() -> Self {
        BrOptions {
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            seeds_per_cell: DEFAULT_SEEDS_PER_CELL,
            train: TrainConfig::default(),
        }
    }
}

impl BrOptions {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidSpec("lambda grid must be nonempty and positive".into()));
        }
        if self.seeds_per_cell == 0 {
            return Err(Error::InvalidSpec("seeds_per_cell must be positive".into()));
        }
        self.train.validate()
    }
}

/// One trained (λ, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrCell {
    pub lambda: f64,
    pub seed: u64,
    /// `None` when training or whitening failed.
    pub b_value: Option<f64>,
    pub whiten_ok: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrRow {
    pub class: ClassTag,
    pub r: usize,
    pub cells: Vec<BrCell>,
    /// Minimum over successful cells; `None` if every cell failed.
    pub b_r: Option<f64>,
    pub oracle: Option<f64>,
}

impl BrRow {
    /// Best value per λ over its seeds.
    pub fn per_lambda(&self) -> Vec<(f64, Option<f64>)> {
        let mut out: Vec<(f64, Option<f64>)> = Vec::new();
        for cell in &self.cells {
            match out.iter_mut().find(|(l, _)| *l == cell.lambda) {
                Some((_, best)) => {
                    if let Some(v) = cell.b_value {
                        *best = Some(best.map_or(v, |b| b.min(v)));
                    }
                }
                None => out.push((cell.lambda, cell.b_value)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub rows: Vec<BrRow>,
}

/// `(2 / r) Σ_{i<r} ψ_i` over the `r` smallest Laplacian eigenvalues.
pub fn br_oracle_tabular(graph: &PositivePairGraph, r: usize) -> Result<f64> {
    if r == 0 || r > graph.n() {
        return Err(Error::InvalidSpec(format!("need 0 < r <= n, got r = {r}")));
    }
    let decomp = eigendecompose(graph, r)?;
    Ok(2.0 / r as f64 * decomp.eigenvalues.iter().map(|v| v.max(0.0)).sum::<f64>())
}

fn run_cell(
    graph: &PositivePairGraph,
    class: &FunctionClassSpec,
    r: usize,
    lambda: f64,
    seed: u64,
    config: &TrainConfig,
) -> BrCell {
    let failed = |whiten_ok, reason: String| BrCell {
        lambda,
        seed,
        b_value: None,
        whiten_ok,
        failure: Some(reason),
    };
    let trained = match train_single(graph, Objective::Population, class, lambda, config, seed) {
        Ok(t) => t,
        Err(e) => {
            log::info!("b_r cell r={r} lambda={lambda} seed={seed}: training failed: {e}");
            return failed(false, e.to_string());
        }
    };
    let f = match forward_points(&trained.model, &graph.coordinate_matrix()) {
        Ok(f) => f,
        Err(e) => return failed(false, e.to_string()),
    };
    match whiten(graph, &f, r) {
        Ok(w) => BrCell {
            lambda,
            seed,
            b_value: Some(pair_discrepancy_values(graph, &w)),
            whiten_ok: true,
            failure: None,
        },
        Err(e) => {
            log::info!("b_r cell r={r} lambda={lambda} seed={seed}: {e}");
            failed(false, e.to_string())
        }
    }
}

/// Train and score every (λ, seed) cell for one `r`.
pub fn estimate_br(
    graph: &PositivePairGraph,
    class: &FunctionClassSpec,
    r: usize,
    options: &BrOptions,
) -> Result<(f64, BrRow)> {
    let row = estimate_row(graph, class, r, options)?;
    match row.b_r {
        Some(v) => Ok((v, row)),
        None => Err(Error::AllGridPointsFailed { r }),
    }
}

fn estimate_row(
    graph: &PositivePairGraph,
    class: &FunctionClassSpec,
    r: usize,
    options: &BrOptions,
) -> Result<BrRow> {
    options.validate()?;
    if r == 0 || r > graph.n() {
        return Err(Error::InvalidSpec(format!("need 0 < r <= n, got r = {r}")));
    }
    let class = class.with_k(r);
    class.shape_for(graph)?;
    let jobs: Vec<(f64, u64)> = options
        .lambda_grid
        .iter()
        .flat_map(|&l| (0..options.seeds_per_cell as u64).map(move |s| (l, s)))
        .collect();
    let cells = par::map_slice(&jobs, |&(lambda, s)| {
        run_cell(graph, &class, r, lambda, options.train.seed.wrapping_add(s), &options.train)
    });
    let b_r = cells
        .iter()
        .filter_map(|c| c.b_value)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    let oracle = if class.class == ClassTag::Tabular {
        Some(br_oracle_tabular(graph, r)?)
    } else {
        None
    };
    Ok(BrRow {
        class: class.class,
        r,
        cells,
        b_r,
        oracle,
    })
}

/// `b_r` for every class and `r`.
///
/// A class that cannot reach covariance `I / r` at any grid point is kept
/// with `b_r = None`; other errors abort.
pub fn br_table(
    graph: &PositivePairGraph,
    classes: &[FunctionClassSpec],
    r_list: &[usize],
    options: &BrOptions,
) -> Result<SeparabilityReport> {
    if classes.is_empty() || r_list.is_empty() {
        return Err(Error::InvalidSpec("class and r lists must be nonempty".into()));
    }
    options.validate()?;
    let mut rows = Vec::new();
    for class in classes {
        for &r in r_list {
            let r = r.min(graph.n());
            let row = estimate_row(graph, class, r, options)?;
            if row.b_r.is_none() {
                log::warn!("{} class: every grid point failed for r = {r}", class.class);
            }
            rows.push(row);
        }
    }
    Ok(SeparabilityReport { rows })
}

#[derive(Serialize)]
struct CellCsv {
    class: ClassTag,
    r: usize,
    lambda: f64,
    b_value: Option<f64>,
    whiten_ok: bool,
    seed: u64,
}

#[derive(Serialize)]
struct SummaryCsv {
    class: ClassTag,
    r: usize,
    b_r: Option<f64>,
    oracle: Option<f64>,
}

/// Columns `class,r,lambda,b_value,whiten_ok,seed`.
pub fn write_cells_csv<W: Write>(report: &SeparabilityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        for c in &row.cells {
            w.serialize(CellCsv {
                class: row.class,
                r: row.r,
                lambda: c.lambda,
                b_value: c.b_value,
                whiten_ok: c.whiten_ok,
                seed: c.seed,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `class,r,b_r,oracle`.
pub fn write_summary_csv<W: Write>(report: &SeparabilityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        w.serialize(SummaryCsv {
            class: row.class,
            r: row.r,
            b_r: row.b_r,
            oracle: row.oracle,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Minimum pair discrepancy over all `f` with `E[f f^T] = I / r`, found by
/// Riemannian gradient descent on the Stiefel manifold from random starts.
///
/// Uses no eigendecomposition; meant as an independent check of
/// [`br_oracle_tabular`] on small graphs.
pub fn br_constrained_search(graph: &PositivePairGraph, r: usize, starts: usize, seed: u64) -> Result<f64> {
    let n = graph.n();
    if r == 0 || r > n {
        return Err(Error::InvalidSpec(format!("need 0 < r <= n, got r = {r}")));
    }
    let triplets = graph.joint().triplets();
    let scale: Vec<f64> = graph.marginal().iter().map(|m| 1.0 / (m.sqrt() * (r as f64).sqrt())).collect();
    let to_f = |h: &DMatrix<f64>| DMatrix::from_fn(n, r, |i, c| scale[i] * h[(i, c)]);
    let objective = |h: &DMatrix<f64>| pair_discrepancy_values(graph, &to_f(h));
    let gradient = |h: &DMatrix<f64>| {
        let f = to_f(h);
        let mut g = DMatrix::<f64>::zeros(n, r);
        for &(i, j, w) in &triplets {
            for c in 0..r {
                g[(i, c)] += 4.0 * w * (f[(i, c)] - f[(j, c)]);
            }
        }
        DMatrix::from_fn(n, r, |i, c| scale[i] * g[(i, c)])
    };
    let retract = |h: DMatrix<f64>| -> DMatrix<f64> {
        let qr = h.qr();
        let q = qr.q();
        let rr = qr.r();
        DMatrix::from_fn(n, r, |i, c| if rr[(c, c)] < 0.0 { -q[(i, c)] } else { q[(i, c)] })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..starts.max(1) {
        let mut h = retract(DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0)));
        let mut value = objective(&h);
        let mut step = 1.0;
        for _ in 0..20_000 {
            let eg = gradient(&h);
            let hte = h.transpose() * &eg;
            let rg = &eg - &h * (&hte + hte.transpose()) * 0.5;
            let gnorm2 = rg.norm_squared();
            if gnorm2 < 1e-26 {
                break;
            }
            let mut accepted = false;
            while step > 1e-16 {
                let trial = retract(&h - &rg * step);
                let tv = objective(&trial);
                if tv <= value - 1e-4 * step * gnorm2 {
                    h = trial;
                    value = tv;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        debug_assert!((covariance(graph, &to_f(&h)) * r as f64 - DMatrix::identity(r, r)).abs().max() < 1e-8);
        best = best.min(value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posgraph::{build_graph, Datapoint, JointMatrix};
    use crate::synthdata::random_graph;

    fn edge() -> PositivePairGraph {
        let v = vec![Datapoint::new(vec![0.0]), Datapoint::new(vec![1.0])];
        let j = JointMatrix::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        build_graph(v, j).unwrap()
    }

    #[test]
    fn oracle_on_uniform_edge() {
        assert!((br_oracle_tabular(&edge(), 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(br_oracle_tabular(&edge(), 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn oracle_monotone_in_r() {
        let g = random_graph(12, 2, 0.3, 2, 5).unwrap();
        let vals: Vec<f64> = (1..=12).map(|r| br_oracle_tabular(&g, r).unwrap()).collect();
        assert!(vals[0].abs() < 1e-10 && vals[1].abs() < 1e-10);
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn constrained_search_matches_oracle_small() {
        for seed in 0..4 {
            let g = random_graph(6, 1, 0.5, 1, seed).unwrap();
            for r in 1..=3 {
                let brute = br_constrained_search(&g, r, 3, seed).unwrap();
                let oracle = br_oracle_tabular(&g, r).unwrap();
                assert!((brute - oracle).abs() < 1e-6, "seed {seed} r {r}: {brute} vs {oracle}");
            }
        }
    }

    #[test]
    fn trained_tabular_matches_oracle() {
        let g = random_graph(20, 1, 0.3, 2, 9).unwrap();
        let options = BrOptions {
            seeds_per_cell: 1,
            ..BrOptions::default()
        };
        let (b, row) = estimate_br(&g, &FunctionClassSpec::new(ClassTag::Tabular, 3), 3, &options).unwrap();
        assert!((b - row.oracle.unwrap()).abs() < 1e-3);
        assert_eq!(row.cells.len(), 9);
    }

    #[test]
    fn disconnected_graph_has_zero_br() {
        let g = random_graph(12, 4, 0.4, 2, 1).unwrap();
        let options = BrOptions {
            lambda_grid: vec![1.0, 10.0],
            seeds_per_cell: 1,
            ..BrOptions::default()
        };
        let (b, _) = estimate_br(&g, &FunctionClassSpec::new(ClassTag::Tabular, 3), 3, &options).unwrap();
        assert!(b <= 1e-6);
    }

    #[test]
    fn linear_above_dimension_fails_every_cell() {
        let g = random_graph(10, 1, 0.4, 2, 2).unwrap();
        let options = BrOptions {
            lambda_grid: vec![1.0],
            seeds_per_cell: 1,
            ..BrOptions::default()
        };
        let err = estimate_br(&g, &FunctionClassSpec::new(ClassTag::Linear, 3), 3, &options).unwrap_err();
        assert!(matches!(err, Error::AllGridPointsFailed { r: 3 }));
        let report = br_table(&g, &[FunctionClassSpec::new(ClassTag::Linear, 3)], &[3], &options).unwrap();
        assert_eq!(report.rows[0].b_r, None);
    }

    #[test]
    fn csv_outputs() {
        let g = random_graph(8, 2, 0.4, 2, 3).unwrap();
        let options = BrOptions {
            lambda_grid: vec![1.0, 3.0],
            seeds_per_cell: 2,
            ..BrOptions::default()
        };
        let report = br_table(&g, &[FunctionClassSpec::new(ClassTag::Tabular, 2)], &[2], &options).unwrap();
        let mut cells = Vec::new();
        write_cells_csv(&report, &mut cells).unwrap();
        let text = String::from_utf8(cells).unwrap();
        assert!(text.starts_with("class,r,lambda,b_value,whiten_ok,seed"));
        assert_eq!(text.lines().count(), 5);
        let mut summary = Vec::new();
        write_summary_csv(&report, &mut summary).unwrap();
        assert!(String::from_utf8(summary).unwrap().starts_with("class,r,b_r,oracle"));
        assert_eq!(report.rows[0].per_lambda().len(), 2);
    }
}
