//! The spectral contrastive loss, training, whitening and the tabular oracle.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funclass::{forward_points, grad_params_points, FunctionClassSpec, RepresentationModel, Shape};
use crate::par;
use crate::posgraph::PositivePairGraph;
use crate::spectral::{eigendecompose, pair_discrepancy_values};

/// Loss value split into its two terms; `total = pair_term + lambda * reg_term`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub total: f64,
    pub pair_term: f64,
    pub reg_term: f64,
    pub lambda: f64,
}

impl LossReport {
    fn new(pair_term: f64, reg_term: f64, lambda: f64) -> Self {
        LossReport {
            total: pair_term + lambda * reg_term,
            pair_term,
            reg_term,
            lambda,
        }
    }
}

/// Covariance `E[f f^T]` of the rows of `f` under the data law.
pub fn covariance(graph: &PositivePairGraph, f: &DMatrix<f64>) -> DMatrix<f64> {
    let k = f.ncols();
    let m = graph.marginal();
    let mut cov = DMatrix::zeros(k, k);
    for (i, &mi) in m.iter().enumerate() {
        let row = f.row(i);
        cov += mi * row.transpose() * row;
    }
    cov
}

fn reg_of(cov: &DMatrix<f64>) -> f64 {
    let k = cov.nrows();
    (cov - DMatrix::<f64>::identity(k, k)).norm_squared()
}

/// Population loss of precomputed representations.
pub fn population_loss_values(graph: &PositivePairGraph, f: &DMatrix<f64>, lambda: f64) -> LossReport {
    LossReport::new(pair_discrepancy_values(graph, f), reg_of(&covariance(graph, f)), lambda)
}

pub fn population_loss(graph: &PositivePairGraph, model: &RepresentationModel, lambda: f64) -> Result<LossReport> {
    let f = forward_points(model, &graph.coordinate_matrix())?;
    Ok(population_loss_values(graph, &f, lambda))
}

/// Population loss and its gradient with respect to the representation matrix.
pub fn population_loss_and_cotangent(
    graph: &PositivePairGraph,
    f: &DMatrix<f64>,
    lambda: f64,
) -> (LossReport, DMatrix<f64>) {
    let (n, k) = f.shape();
    let cov = covariance(graph, f);
    let dev = &cov - DMatrix::<f64>::identity(k, k);
    let m = graph.marginal();
    let rows = par::map_range(n, |i| {
        let mut g = vec![0.0; k];
        let mut pair = 0.0;
        for (j, w) in graph.joint().row(i) {
            for (c, gc) in g.iter_mut().enumerate() {
                let diff = f[(i, c)] - f[(j, c)];
                pair += w * diff * diff;
                *gc += 4.0 * w * diff;
            }
        }
        for (c, gc) in g.iter_mut().enumerate() {
            let reg: f64 = (0..k).map(|e| dev[(c, e)] * f[(i, e)]).sum();
            *gc += lambda * 4.0 * m[i] * reg;
        }
        (pair, g)
    });
    let pair: f64 = rows.iter().map(|r| r.0).sum();
    let cot = DMatrix::from_fn(n, k, |i, c| rows[i].1[c]);
    (LossReport::new(pair, dev.norm_squared(), lambda), cot)
}

/// How the empirical covariance sums over the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularizerNorm {
    /// `(1/n_pre) sum f f^T`, consistent with the population regularizer.
    #[default]
    Mean,
    /// Un-normalized `sum f f^T`.
    Sum,
}

/// Positive pairs as vertex index pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pairs: Vec<(usize, usize)>,
}

impl PairSample {
    /// `n_pre` i.i.d. draws from the joint.
    pub fn draw(graph: &PositivePairGraph, n_pre: usize, seed: u64) -> Result<Self> {
        if n_pre == 0 {
            return Err(Error::EmptySample);
        }
        let triplets = graph.joint().triplets();
        let dist = WeightedIndex::new(triplets.iter().map(|t| t.2))
            .map_err(|e| Error::InvalidSpec(format!("cannot sample pairs: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..n_pre)
            .map(|_| {
                let t = triplets[dist.sample(&mut rng)];
                (t.0, t.1)
            })
            .collect();
        Ok(PairSample { pairs })
    }

    /// Explicit pairs; each must carry positive joint mass.
    pub fn from_pairs(graph: &PositivePairGraph, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        for &(i, j) in &pairs {
            let n = graph.n();
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if graph.joint().get(i, j) <= 0.0 {
                return Err(Error::InvalidEntry { i, j, value: 0.0 });
            }
        }
        Ok(PairSample { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Empirical loss of representations and its gradient.
pub fn empirical_loss_and_cotangent(
    sample: &PairSample,
    f: &DMatrix<f64>,
    lambda: f64,
    norm: RegularizerNorm,
) -> (LossReport, DMatrix<f64>) {
    let (n, k) = f.shape();
    let count = sample.len() as f64;
    let weight = match norm {
        RegularizerNorm::Mean => 1.0 / count,
        RegularizerNorm::Sum => 1.0,
    };
    let mut cov = DMatrix::zeros(k, k);
    let mut pair = 0.0;
    let mut cot = DMatrix::zeros(n, k);
    for &(a, b) in &sample.pairs {
        let row = f.row(a);
        cov += weight * row.transpose() * row;
        for c in 0..k {
            let diff = f[(a, c)] - f[(b, c)];
            pair += diff * diff / count;
            cot[(a, c)] += 2.0 * diff / count;
            cot[(b, c)] -= 2.0 * diff / count;
        }
    }
    let dev = &cov - DMatrix::<f64>::identity(k, k);
    for &(a, _) in &sample.pairs {
        for c in 0..k {
            let reg: f64 = (0..k).map(|e| dev[(c, e)] * f[(a, e)]).sum();
            cot[(a, c)] += lambda * 4.0 * weight * reg;
        }
    }
    (LossReport::new(pair, dev.norm_squared(), lambda), cot)
}

pub fn empirical_loss(
    sample: &PairSample,
    graph: &PositivePairGraph,
    model: &RepresentationModel,
    lambda: f64,
    norm: RegularizerNorm,
) -> Result<LossReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let f = forward_points(model, &graph.coordinate_matrix())?;
    Ok(empirical_loss_and_cotangent(sample, &f, lambda, norm).0)
}

/// Which loss to minimize.
#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    Population,
    Empirical(&'a PairSample, RegularizerNorm),
}

/// Loss and parameter gradient of a model.
pub fn loss_and_grad(
    graph: &PositivePairGraph,
    x: &DMatrix<f64>,
    model: &RepresentationModel,
    objective: Objective<'_>,
    lambda: f64,
) -> Result<(LossReport, Vec<f64>)> {
    let f = forward_points(model, x)?;
    let (report, cot) = match objective {
        Objective::Population => population_loss_and_cotangent(graph, &f, lambda),
        Objective::Empirical(sample, norm) => empirical_loss_and_cotangent(sample, &f, lambda, norm),
    };
    Ok((report, grad_params_points(model, x, &cot)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub step_size: f64,
    /// Multiplier applied to the step after each accepted iterate.
    pub step_growth: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub init_scale: f64,
    /// Stop after 20 consecutive accepted steps with loss decrease below this.
    pub tol: f64,
    pub momentum: bool,
    /// Number of random starts; defaults to 5 for ReLU/conv and 1 otherwise.
    pub starts: Option<usize>,
    /// Scale tabular gradients by `1 / p_data(x)`.
    pub precondition_tabular: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            step_size: 0.05,
            step_growth: 1.05,
            max_iters: 5000,
            seed: 0,
            init_scale: 0.1,
            tol: 1e-15,
            momentum: true,
            starts: None,
            precondition_tabular: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !(self.step_growth >= 1.0) || self.max_iters == 0 {
            return Err(Error::InvalidSpec(
                "need step_size > 0, step_growth >= 1, max_iters >= 1".into(),
            ));
        }
        if self.starts == Some(0) {
            return Err(Error::InvalidSpec("starts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub pair_term: f64,
    pub reg_term: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub model: RepresentationModel,
    pub loss: LossReport,
    /// Accepted iterates only; totals are non-increasing.
    pub trace: Vec<TraceRow>,
    pub seed: u64,
}

const DIVERGENCE_LIMIT: f64 = 1e12;

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Full-batch gradient descent from one seeded initialization.
pub fn train_single(
    graph: &PositivePairGraph,
    objective: Objective<'_>,
    class: &FunctionClassSpec,
    lambda: f64,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainResult> {
    config.validate()?;
    let shape = class.shape_for(graph)?;
    let model = RepresentationModel::random(shape, config.init_scale, seed)?;
    train_from(graph, objective, model, lambda, config, seed)
}

/// Gradient descent starting from a given model.
pub fn train_from(
    graph: &PositivePairGraph,
    objective: Objective<'_>,
    mut model: RepresentationModel,
    lambda: f64,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainResult> {
    config.validate()?;
    let x = graph.coordinate_matrix();
    let precond: Option<Vec<f64>> = match model.shape() {
        Shape::Tabular { k, .. } if config.precondition_tabular => Some(
            graph
                .marginal()
                .iter()
                .flat_map(|&m| std::iter::repeat_n(1.0 / m, k))
                .collect(),
        ),
        _ => None,
    };
    let direction = |g: &[f64]| -> Vec<f64> {
        match &precond {
            Some(p) => g.iter().zip(p).map(|(a, b)| a * b).collect(),
            None => g.to_vec(),
        }
    };
    let (mut loss, mut grad) = loss_and_grad(graph, &x, &model, objective, lambda)?;
    if !loss.total.is_finite() || loss.total > DIVERGENCE_LIMIT {
        return Err(Error::Divergence { iter: 0, loss: loss.total });
    }
    let row = |iter: usize, l: &LossReport| TraceRow {
        iter,
        pair_term: l.pair_term,
        reg_term: l.reg_term,
        total: l.total,
    };
    let mut trace = vec![row(0, &loss)];
    let beta = if config.momentum { 0.9 } else { 0.0 };
    let mut velocity = vec![0.0; model.params().len()];
    let mut step = config.step_size;
    let mut quiet = 0;
    for iter in 1..=config.max_iters {
        if !all_finite(&grad) {
            return Err(Error::NonFiniteGradient { iter });
        }
        let dir = direction(&grad);
        for (v, d) in velocity.iter_mut().zip(&dir) {
            *v = beta * *v - step * d;
        }
        let mut trial = model.clone();
        for (p, v) in trial.params_mut().iter_mut().zip(&velocity) {
            *p += v;
        }
        let (t_loss, t_grad) = loss_and_grad(graph, &x, &trial, objective, lambda)?;
        if !(t_loss.total <= loss.total) {
            step *= 0.5;
            velocity.iter_mut().for_each(|v| *v = 0.0);
            if step < 1e-300 {
                break;
            }
            continue;
        }
        let decrease = loss.total - t_loss.total;
        model = trial;
        loss = t_loss;
        grad = t_grad;
        step *= config.step_growth;
        trace.push(row(iter, &loss));
        if decrease <= config.tol {
            quiet += 1;
            if quiet >= 20 {
                break;
            }
        } else {
            quiet = 0;
        }
        if loss.total == 0.0 {
            break;
        }
    }
    Ok(TrainResult {
        model,
        loss,
        trace,
        seed,
    })
}

/// Multi-start training; returns the run with the smallest final loss.
pub fn train(
    graph: &PositivePairGraph,
    objective: Objective<'_>,
    class: &FunctionClassSpec,
    lambda: f64,
    config: &TrainConfig,
) -> Result<TrainResult> {
    config.validate()?;
    let starts = config
        .starts
        .unwrap_or(if class.class.is_nonconvex() { 5 } else { 1 });
    let seeds: Vec<u64> = (0..starts as u64).map(|s| config.seed.wrapping_add(s)).collect();
    let runs = par::map_slice(&seeds, |&seed| train_single(graph, objective, class, lambda, config, seed));
    let mut best: Option<TrainResult> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.loss.total < b.loss.total) {
                    best = Some(r);
                }
            }
            Err(e) => {
                log::warn!("training start failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}

/// Minimum of the loss over the tabular class with `k` outputs, and a minimizer.
///
/// Eigenfunction `g_i` with eigenvalue `psi_i` enters with weight `c_i^2 =
/// max(0, 1 - psi_i / lambda)`, contributing `2 psi_i - psi_i^2 / lambda`
/// when `psi_i <= lambda` and `lambda` otherwise.
pub fn tabular_min_oracle(graph: &PositivePairGraph, k: usize, lambda: f64) -> Result<(f64, RepresentationModel)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidSpec("lambda must be positive".into()));
    }
    let decomp = eigendecompose(graph, k)?;
    let mut total = 0.0;
    let mut values = DMatrix::zeros(graph.n(), k);
    for (c, (&psi, g)) in decomp.eigenvalues.iter().zip(&decomp.eigenfunctions).enumerate() {
        let psi = psi.max(0.0);
        let t = (1.0 - psi / lambda).max(0.0);
        total += if psi <= lambda { 2.0 * psi - psi * psi / lambda } else { lambda };
        let scale = t.sqrt();
        for (i, v) in g.values().iter().enumerate() {
            values[(i, c)] = scale * v;
        }
    }
    Ok((total, RepresentationModel::tabular(&values)?))
}

/// Floor used when inverting covariance eigenvalues.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// `f E[f f^T]^{-1/2} / sqrt(r)`, giving covariance `I / r`.
pub fn whiten(graph: &PositivePairGraph, f: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let cov = covariance(graph, f);
    let eig = SymmetricEigen::new(cov);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 1e-10) {
        return Err(Error::SingularCovariance { min_eigenvalue: min });
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.max(EIGEN_FLOOR).sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(f * root / (r as f64).sqrt())
}

/// Whitened representations of a model with `r = k`.
pub fn whiten_model(graph: &PositivePairGraph, model: &RepresentationModel) -> Result<DMatrix<f64>> {
    let f = forward_points(model, &graph.coordinate_matrix())?;
    whiten(graph, &f, model.out_dim())
}

/// CSV with columns `iter,pair_term,reg_term,total`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclass::{construct_example1_optimal, scaled_indicator_model, ClassTag};
    use crate::posgraph::{build_graph, connected_components, Datapoint, JointMatrix};
    use crate::synthdata::{example1_graph, random_graph, Example1Spec};

    fn uniform_pair() -> PositivePairGraph {
        let v = vec![Datapoint::new(vec![0.0]), Datapoint::new(vec![1.0])];
        build_graph(v, JointMatrix::from_rows(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap()).unwrap()
    }

    #[test]
    fn zero_model_loss() {
        let g = uniform_pair();
        let m = RepresentationModel::zeros(Shape::Tabular { n: 2, k: 2 }).unwrap();
        let r = population_loss(&g, &m, 3.0).unwrap();
        assert_eq!((r.pair_term, r.reg_term, r.total), (0.0, 2.0, 6.0));
    }

    #[test]
    fn example1_construction_has_zero_loss() {
        let spec = Example1Spec::new(4, 2, vec![0.5, 1.0]);
        let lg = example1_graph(&spec).unwrap();
        let m = construct_example1_optimal(&spec, 2).unwrap();
        for lambda in [0.1, 1.0, 100.0] {
            assert_eq!(population_loss(&lg.graph, &m, lambda).unwrap().total, 0.0);
        }
    }

    #[test]
    fn indicator_model_has_zero_loss() {
        let g = random_graph(20, 4, 0.5, 2, 3).unwrap();
        let comps = connected_components(&g);
        let m = scaled_indicator_model(&g, &comps).unwrap();
        assert!(population_loss(&g, &m, 1.0).unwrap().total < 1e-24);
        let (min, _) = tabular_min_oracle(&g, 4, 1.0).unwrap();
        assert!(min.abs() < 1e-12);
    }

    #[test]
    fn full_support_sample_matches_population() {
        let g = random_graph(6, 1, 0.6, 2, 8).unwrap();
        // multiplicities proportional to the joint, realized by rational weights
        let trip = g.joint().triplets();
        let scale = 1e4;
        let mut pairs = Vec::new();
        let mut weights = Vec::new();
        for &(i, j, w) in &trip {
            let c = (w * scale).round() as usize;
            weights.push(c as f64 / scale);
            pairs.extend(std::iter::repeat_n((i, j), c));
        }
        let total: f64 = weights.iter().sum();
        let rows: Vec<Vec<f64>> = (0..g.n())
            .map(|i| (0..g.n()).map(|j| {
                trip.iter().zip(&weights).find(|(t, _)| t.0 == i && t.1 == j).map_or(0.0, |(_, w)| w / total)
            }).collect())
            .collect();
        let rounded = build_graph(g.vertices().to_vec(), JointMatrix::from_rows(&rows).unwrap()).unwrap();
        let sample = PairSample::from_pairs(&rounded, pairs).unwrap();
        let m = RepresentationModel::random(Shape::Linear { k: 2, d: 2 }, 1.0, 4).unwrap();
        let pop = population_loss(&rounded, &m, 2.0).unwrap();
        let emp = empirical_loss(&sample, &rounded, &m, 2.0, RegularizerNorm::Mean).unwrap();
        assert!((pop.total - emp.total).abs() < 1e-12, "{} {}", pop.total, emp.total);
    }

    #[test]
    fn single_pair_constant_model() {
        let g = uniform_pair();
        let sample = PairSample::from_pairs(&g, vec![(0, 1)]).unwrap();
        let m = RepresentationModel::tabular(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0])).unwrap();
        let r = empirical_loss(&sample, &g, &m, 1.0, RegularizerNorm::Mean).unwrap();
        assert_eq!(r.pair_term, 0.0);
        let v = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        assert_eq!(r.reg_term, (&v * v.transpose() - DMatrix::identity(2, 2)).norm_squared());
        assert!(matches!(PairSample::draw(&g, 0, 1), Err(Error::EmptySample)));
    }

    #[test]
    fn oracle_matches_brute_force_on_pair() {
        let g = uniform_pair();
        for lambda in [0.5, 2.0] {
            let (min, model) = tabular_min_oracle(&g, 1, lambda).unwrap();
            let mut brute = f64::INFINITY;
            let steps = 800;
            for a in 0..=steps {
                for b in 0..=steps {
                    let u = -3.0 + 6.0 * a as f64 / steps as f64;
                    let v = -3.0 + 6.0 * b as f64 / steps as f64;
                    let f = DMatrix::from_row_slice(2, 1, &[u, v]);
                    brute = brute.min(population_loss_values(&g, &f, lambda).total);
                }
            }
            assert!(min <= brute + 1e-12);
            assert!(brute - min < 1e-3, "grid {brute} oracle {min}");
            let at = population_loss(&g, &model, lambda).unwrap().total;
            assert!((at - min).abs() < 1e-12);
        }
    }

    #[test]
    fn training_reaches_tabular_oracle() {
        let g = random_graph(15, 1, 0.4, 2, 2).unwrap();
        let class = FunctionClassSpec::new(ClassTag::Tabular, 3);
        let config = TrainConfig {
            max_iters: 20000,
            ..TrainConfig::default()
        };
        let res = train(&g, Objective::Population, &class, 1.0, &config).unwrap();
        let (min, _) = tabular_min_oracle(&g, 3, 1.0).unwrap();
        assert!(min <= res.loss.total + 1e-6);
        assert!(res.loss.total - min < 1e-4, "{} vs {}", res.loss.total, min);
        assert!(res.trace.windows(2).all(|w| w[1].total <= w[0].total));
    }

    #[test]
    fn training_is_deterministic() {
        let g = random_graph(10, 1, 0.4, 3, 9).unwrap();
        let class = FunctionClassSpec::new(ClassTag::Relu, 2);
        let config = TrainConfig {
            max_iters: 200,
            ..TrainConfig::default()
        };
        let a = train(&g, Objective::Population, &class, 1.0, &config).unwrap();
        let b = train(&g, Objective::Population, &class, 1.0, &config).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn whitening() {
        let g = random_graph(12, 1, 0.5, 3, 1).unwrap();
        let m = RepresentationModel::random(Shape::Linear { k: 3, d: 3 }, 1.0, 2).unwrap();
        let w = whiten_model(&g, &m).unwrap();
        let cov = covariance(&g, &w);
        assert!((cov - DMatrix::identity(3, 3) / 3.0).abs().max() < 1e-9);
        let again = whiten(&g, &w, 3).unwrap();
        assert!((covariance(&g, &again) - DMatrix::identity(3, 3) / 3.0).abs().max() < 1e-9);

        let mut rank_def = DMatrix::zeros(12, 2);
        rank_def.column_mut(0).fill(1.0);
        assert!(matches!(whiten(&g, &rank_def, 2), Err(Error::SingularCovariance { .. })));
    }

    #[test]
    fn trace_csv_header() {
        let rows = [TraceRow { iter: 0, pair_term: 1.0, reg_term: 2.0, total: 3.0 }];
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("iter,pair_term,reg_term,total\n0,"));
    }
}
