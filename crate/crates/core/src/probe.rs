//! Linear probes, measured assumption quantities and the bound evaluators.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funclass::{
    forward_points, grad_params_points, ClassTag, FunctionClassSpec, RepresentationModel,
};
use crate::objective::covariance;
use crate::posgraph::{cross_cluster_mass, Partition, PositivePairGraph};
use crate::spectral::{min_expansion_over_class, pair_discrepancy_values, Expansion, GraphFunction};

/// Ridge added to the representation covariance before solving for the head.
pub const PROBE_RIDGE: f64 = 1e-10;

/// Residual below which a class counts as implementing the partition.
pub const IMPLEMENTABLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ProbeResult {
    /// `r x k` head.
    pub head: DMatrix<f64>,
    /// `E_{p_data} ||W f(x) - y(x)||^2`.
    pub error: f64,
    pub head_norm: f64,
}

fn weighted_sq_error(graph: &PositivePairGraph, pred: &DMatrix<f64>, targets: &DMatrix<f64>) -> f64 {
    graph
        .marginal()
        .iter()
        .enumerate()
        .map(|(i, &m)| m * (pred.row(i) - targets.row(i)).norm_squared())
        .sum()
}

/// `E[t f^T]` under the data law.
fn cross_moment(graph: &PositivePairGraph, f: &DMatrix<f64>, targets: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(targets.ncols(), f.ncols());
    for (i, &m) in graph.marginal().iter().enumerate() {
        out += m * targets.row(i).transpose() * f.row(i);
    }
    out
}

/// Weighted ridge least squares `W = E[t f^T] (E[f f^T] + ridge I)^{-1}`.
pub fn fit_linear_head(
    graph: &PositivePairGraph,
    representations: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    norm_bound: Option<f64>,
) -> Result<ProbeResult> {
    let n = graph.n();
    if representations.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "representation rows",
            expected: n,
            found: representations.nrows(),
        });
    }
    if targets.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "target rows",
            expected: n,
            found: targets.nrows(),
        });
    }
    let k = representations.ncols();
    let cov = covariance(graph, representations) + DMatrix::identity(k, k) * PROBE_RIDGE;
    let eig = SymmetricEigen::new(cov);
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.max(PROBE_RIDGE)));
    let inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    let mut head = cross_moment(graph, representations, targets) * inv;
    let mut head_norm = head.norm();
    if let Some(bound) = norm_bound {
        if head_norm > bound {
            head *= bound / head_norm;
            head_norm = bound;
        }
    }
    let pred = representations * head.transpose();
    let error = weighted_sq_error(graph, &pred, targets);
    Ok(ProbeResult {
        head,
        error,
        head_norm,
    })
}

/// Probe a model's representations on the graph's vertices.
pub fn probe_model(
    graph: &PositivePairGraph,
    model: &RepresentationModel,
    targets: &DMatrix<f64>,
) -> Result<ProbeResult> {
    let f = forward_points(model, &graph.coordinate_matrix())?;
    fit_linear_head(graph, &f, targets, None)
}

/// One-hot indicators of the partition cells, `n x m`.
pub fn partition_onehots(partition: &Partition) -> DMatrix<f64> {
    let a = partition.assignment();
    DMatrix::from_fn(a.len(), partition.m(), |i, c| if a[i] == c { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub alpha: f64,
    pub beta: Expansion,
    /// False when `beta` is a multi-start estimate rather than an exact infimum.
    pub beta_certified: bool,
    /// Certified tabular β of the same partition; a lower bound on any class's β.
    pub beta_tabular: Expansion,
    pub p_min: f64,
    pub p_max: f64,
    pub m: usize,
    pub implementable: bool,
    pub implementable_residual: f64,
}

impl AssumptionReport {
    /// The β used by [`theorem31_bound`]: the class value when certified, else the tabular one.
    pub fn bound_beta(&self) -> Expansion {
        if self.beta_certified {
            self.beta
        } else {
            self.beta_tabular
        }
    }

    /// Flat numeric view; an infinite `beta` becomes `f64::INFINITY`.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        map.insert("alpha".into(), self.alpha);
        map.insert("beta".into(), self.beta.finite().unwrap_or(f64::INFINITY));
        map.insert("beta_certified".into(), f64::from(u8::from(self.beta_certified)));
        map.insert("beta_tabular".into(), self.beta_tabular.finite().unwrap_or(f64::INFINITY));
        map.insert("p_min".into(), self.p_min);
        map.insert("p_max".into(), self.p_max);
        map.insert("m".into(), self.m as f64);
        map.insert("implementable".into(), f64::from(u8::from(self.implementable)));
        map.insert("implementable_residual".into(), self.implementable_residual);
        map
    }
}

/// Smallest `E ||f(x) - t(x)||^2` found for `f` in the class with `t.ncols()` outputs.
///
/// Exact for tabular and linear classes; gradient descent from several seeds
/// for ReLU and convolutional networks.
pub fn class_fit_residual(
    graph: &PositivePairGraph,
    class: &FunctionClassSpec,
    targets: &DMatrix<f64>,
) -> Result<f64> {
    match class.class {
        ClassTag::Tabular => Ok(0.0),
        ClassTag::Linear => Ok(fit_linear_head(graph, &graph.coordinate_matrix(), targets, None)?.error),
        ClassTag::Relu | ClassTag::Conv => {
            let spec = class.with_k(targets.ncols());
            let mut best = f64::INFINITY;
            for seed in 0..5 {
                best = best.min(regress(graph, &spec, targets, seed)?);
                if best <= IMPLEMENTABLE_TOL {
                    break;
                }
            }
            Ok(best)
        }
    }
}

fn regress(
    graph: &PositivePairGraph,
    class: &FunctionClassSpec,
    targets: &DMatrix<f64>,
    seed: u64,
) -> Result<f64> {
    let x = graph.coordinate_matrix();
    let m = graph.marginal();
    let shape = class.shape_for(graph)?;
    let mut model = RepresentationModel::random(shape, 0.5, seed)?;
    let eval = |model: &RepresentationModel| -> Result<(f64, DMatrix<f64>)> {
        let diff = forward_points(model, &x)? - targets;
        let loss = (0..diff.nrows()).map(|i| m[i] * diff.row(i).norm_squared()).sum();
        let cot = DMatrix::from_fn(diff.nrows(), diff.ncols(), |i, c| 2.0 * m[i] * diff[(i, c)]);
        Ok((loss, cot))
    };
    let (mut loss, mut cot) = eval(&model)?;
    let mut step = 0.1;
    for _ in 0..4000 {
        if loss <= IMPLEMENTABLE_TOL * 1e-2 || step < 1e-14 {
            break;
        }
        let grad = grad_params_points(&model, &x, &cot)?;
        let mut trial = model.clone();
        for (p, g) in trial.params_mut().iter_mut().zip(&grad) {
            *p -= step * g;
        }
        let (next, next_cot) = eval(&trial)?;
        if next.is_finite() && next < loss {
            model = trial;
            loss = next;
            cot = next_cot;
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    Ok(loss)
}

/// Measure α, β, cluster masses and implementability of a partition for a class.
pub fn measure_assumptions(
    graph: &PositivePairGraph,
    partition: &Partition,
    class: &FunctionClassSpec,
) -> Result<AssumptionReport> {
    let alpha = cross_cluster_mass(graph, partition)?;
    let mut beta = Expansion::Infinite;
    let mut beta_certified = true;
    let mut beta_tabular = Expansion::Infinite;
    let tabular = FunctionClassSpec::new(ClassTag::Tabular, class.k);
    for members in partition.members() {
        let found = min_expansion_over_class(graph, &members, class)?;
        beta = beta.min(found.beta);
        beta_certified &= found.certified;
        beta_tabular = if class.class == ClassTag::Tabular {
            beta
        } else {
            beta_tabular.min(min_expansion_over_class(graph, &members, &tabular)?.beta)
        };
    }
    let masses = partition.masses(graph);
    let p_min = masses.iter().copied().fold(f64::INFINITY, f64::min);
    let p_max = masses.iter().copied().fold(0.0, f64::max);
    let residual = class_fit_residual(graph, class, &partition_onehots(partition))?;
    Ok(AssumptionReport {
        alpha,
        beta,
        beta_certified,
        beta_tabular,
        p_min,
        p_max,
        m: partition.m(),
        implementable: residual <= IMPLEMENTABLE_TOL,
        implementable_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenspaceReport {
    pub phi: f64,
    pub phi_tilde: f64,
    pub epsilon: f64,
    pub zeta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub m: usize,
}

/// Tolerance on `E[f_eig f_eig^T] = I`.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

/// Measure (φ, φ̃, ε, ζ, B) for an orthonormal `f_eig` (`n x m`).
///
/// `phi_tilde` is the largest Rayleigh ratio among the candidates and
/// `epsilon` their largest projection residual onto the span of `f_eig`.
pub fn measure_eigenspace_quantities(
    graph: &PositivePairGraph,
    f_eig: &DMatrix<f64>,
    candidates: &[GraphFunction],
    targets: &DMatrix<f64>,
) -> Result<EigenspaceReport> {
    let m = f_eig.ncols();
    if f_eig.nrows() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "eigenfunction rows",
            expected: graph.n(),
            found: f_eig.nrows(),
        });
    }
    let cov = covariance(graph, f_eig);
    let deviation = (cov - DMatrix::<f64>::identity(m, m)).abs().max();
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let phi = pair_discrepancy_values(graph, f_eig);
    let mut phi_tilde: f64 = 0.0;
    let mut epsilon: f64 = 0.0;
    for g in candidates {
        if g.graph_id() != graph.id() {
            return Err(Error::GraphMismatch);
        }
        let col = DMatrix::from_column_slice(graph.n(), 1, g.values());
        let norm = covariance(graph, &col)[(0, 0)];
        if norm > 0.0 {
            phi_tilde = phi_tilde.max(pair_discrepancy_values(graph, &col) / norm);
        }
        let coeff = cross_moment(graph, f_eig, &col);
        let resid = &col - f_eig * coeff.transpose();
        epsilon = epsilon.max(covariance(graph, &resid)[(0, 0)]);
    }
    let fit = fit_linear_head(graph, f_eig, targets, None)?;
    Ok(EigenspaceReport {
        phi,
        phi_tilde,
        epsilon,
        zeta: fit.error,
        b: fit.head_norm,
        m,
    })
}

/// `(α/β) · P_max / (P_min − α)` with β from [`AssumptionReport::bound_beta`].
pub fn theorem31_bound(report: &AssumptionReport) -> Result<f64> {
    if report.alpha >= report.p_min {
        return Err(Error::AlphaExceedsPmin {
            alpha: report.alpha,
            p_min: report.p_min,
        });
    }
    if report.alpha == 0.0 {
        return Ok(0.0);
    }
    match report.bound_beta() {
        Expansion::Infinite => Ok(0.0),
        Expansion::Finite(b) if b > 0.0 => {
            Ok(report.alpha / b * report.p_max / (report.p_min - report.alpha))
        }
        Expansion::Finite(_) => Err(Error::BetaZero),
    }
}

/// `2ζ + 4B²kε + 16φB²k/λ`.
pub fn theorem42_bound(report: &EigenspaceReport, k: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidSpec("lambda must be positive".into()));
    }
    let b2k = report.b * report.b * k as f64;
    Ok(2.0 * report.zeta + 4.0 * b2k * report.epsilon + 16.0 * report.phi * b2k / lambda)
}

/// Outcome of comparing a measured error with a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// Exceeds the explicit bound but not twice the bound.
    Inspect,
    Fail,
}

/// Quantities at or below this count as exactly zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Compare a probe error with the eigenspace bound.
///
/// When φ, ε and ζ all vanish the error itself must be below `1e-8`.
pub fn theorem42_verdict(error: f64, report: &EigenspaceReport, bound: f64) -> Verdict {
    let zero = report.phi <= ZERO_TOL && report.epsilon <= ZERO_TOL && report.zeta <= ZERO_TOL;
    if error <= bound || (zero && error <= 1e-8) {
        Verdict::Pass
    } else if error <= 2.0 * bound {
        Verdict::Inspect
    } else {
        Verdict::Fail
    }
}

/// `2 r m κ² ρ²`.
pub fn theorem56_bound(r: usize, m: usize, kappa: f64, rho: f64) -> f64 {
    2.0 * r as f64 * m as f64 * kappa * kappa * rho * rho
}

/// One exported probe result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub example: String,
    pub class: ClassTag,
    pub k: usize,
    pub lambda: f64,
    pub error: f64,
    /// `None` serializes as `null` when no finite bound applies.
    pub bound: Option<f64>,
    pub assumptions: BTreeMap<String, Option<f64>>,
}

impl ProbeRow {
    /// Non-finite values are stored as `null`.
    pub fn new(
        example: impl Into<String>,
        class: ClassTag,
        k: usize,
        lambda: f64,
        error: f64,
        bound: Option<f64>,
        assumptions: BTreeMap<String, f64>,
    ) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        ProbeRow {
            example: example.into(),
            class,
            k,
            lambda,
            error,
            bound: bound.and_then(finite),
            assumptions: assumptions.into_iter().map(|(k, v)| (k, finite(v))).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclass::construct_example1_optimal;
    use crate::posgraph::{build_graph, connected_components, Datapoint, JointMatrix};
    use crate::synthdata::{example1_graph, example1_sign_targets, Example1Spec};

    fn two_components() -> PositivePairGraph {
        let vertices = (0..4).map(|i| Datapoint::new(vec![i as f64])).collect();
        let joint = JointMatrix::from_triplets(
            4,
            &[(0, 1, 0.25), (1, 0, 0.25), (2, 3, 0.25), (3, 2, 0.25)],
        )
        .unwrap();
        build_graph(vertices, joint).unwrap()
    }

    #[test]
    fn indicators_fit_exactly() {
        let g = two_components();
        let p = connected_components(&g);
        let f = partition_onehots(&p);
        let t = DMatrix::from_fn(4, 1, |i, _| if p.assignment()[i] == 0 { 3.0 } else { -1.0 });
        let fit = fit_linear_head(&g, &f, &t, None).unwrap();
        assert!(fit.error < 1e-12);
    }

    #[test]
    fn orthogonal_representation_gives_zero_head() {
        let g = two_components();
        let f = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let t = DMatrix::from_fn(4, 2, |i, c| if (i < 2) == (c == 0) { 1.0 } else { 0.0 });
        let fit = fit_linear_head(&g, &f, &t, None).unwrap();
        assert!(fit.head.norm() < 1e-12);
        assert!((fit.error - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_bound_rescales() {
        let g = two_components();
        let f = DMatrix::from_column_slice(4, 1, &[1.0, 1.0, -1.0, -1.0]);
        let t = f.clone() * 5.0;
        let fit = fit_linear_head(&g, &f, &t, Some(1.0)).unwrap();
        assert!((fit.head_norm - 1.0).abs() < 1e-12);
        assert!((fit.error - 16.0).abs() < 1e-9);
    }

    #[test]
    fn example1_construction_probe_is_exact() {
        let spec = Example1Spec::new(4, 2, vec![0.5, 1.0]);
        let lg = example1_graph(&spec).unwrap();
        let model = construct_example1_optimal(&spec, 2).unwrap();
        let t = example1_sign_targets(&lg.graph, &spec);
        let fit = probe_model(&lg.graph, &model, &t).unwrap();
        assert!(fit.error < 1e-12);
    }

    #[test]
    fn component_partition_tabular_assumptions() {
        let g = two_components();
        let p = connected_components(&g);
        let rep = measure_assumptions(&g, &p, &FunctionClassSpec::new(ClassTag::Tabular, 2)).unwrap();
        assert_eq!(rep.alpha, 0.0);
        assert!(rep.implementable);
        assert_eq!(rep.p_min, 0.5);
        assert_eq!(theorem31_bound(&rep).unwrap(), 0.0);
    }

    #[test]
    fn example1_component_partition_not_linear() {
        let spec = Example1Spec::new(3, 1, vec![0.5, 1.0]);
        let lg = example1_graph(&spec).unwrap();
        let p = connected_components(&lg.graph);
        let rep = measure_assumptions(&lg.graph, &p, &FunctionClassSpec::new(ClassTag::Linear, 8)).unwrap();
        assert!(!rep.implementable);
        assert!(rep.implementable_residual > 0.1);
    }

    #[test]
    fn theorem31_arithmetic() {
        let mut rep = AssumptionReport {
            alpha: 0.01,
            beta: Expansion::Finite(0.5),
            beta_certified: true,
            beta_tabular: Expansion::Finite(0.4),
            p_min: 0.25,
            p_max: 0.25,
            m: 4,
            implementable: true,
            implementable_residual: 0.0,
        };
        assert!((theorem31_bound(&rep).unwrap() - 0.02 * 0.25 / 0.24).abs() < 1e-15);
        rep.alpha = 0.25;
        assert!(matches!(theorem31_bound(&rep), Err(Error::AlphaExceedsPmin { .. })));
        rep.alpha = 0.01;
        rep.beta = Expansion::Finite(0.0);
        assert!(matches!(theorem31_bound(&rep), Err(Error::BetaZero)));
        rep.beta = Expansion::Finite(0.5);
        rep.beta_certified = false;
        assert!((theorem31_bound(&rep).unwrap() - 0.025 * 0.25 / 0.24).abs() < 1e-15);
    }

    #[test]
    fn theorem42_arithmetic() {
        let rep = EigenspaceReport {
            phi: 0.1,
            phi_tilde: 0.0,
            epsilon: 0.0,
            zeta: 0.01,
            b: 1.0,
            m: 2,
        };
        assert!((theorem42_bound(&rep, 2, 10.0).unwrap() - 0.34).abs() < 1e-12);
        let zero = EigenspaceReport { zeta: 0.0, ..rep };
        let a = theorem42_bound(&zero, 2, 10.0).unwrap();
        let b = theorem42_bound(&zero, 2, 20.0).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        assert_eq!(theorem42_verdict(0.5, &rep, 0.34), Verdict::Inspect);
        assert_eq!(theorem42_verdict(0.7, &rep, 0.34), Verdict::Fail);
    }

    #[test]
    fn theorem56_arithmetic() {
        assert!((theorem56_bound(2, 2, 1.0, 0.1) - 0.08).abs() < 1e-15);
        assert_eq!(theorem56_bound(2, 2, 1.0, 0.0), 0.0);
    }

    #[test]
    fn eigenspace_zeros_on_example1() {
        let spec = Example1Spec::new(4, 2, vec![0.5, 1.0]);
        let g = example1_graph(&spec).unwrap().graph;
        let f = DMatrix::from_fn(g.n(), 2, |i, c| g.vertex(i).coords()[c]);
        let cand = GraphFunction::from_fn(&g, |i| 0.3 * g.vertex(i).coords()[0] - 2.0 * g.vertex(i).coords()[1]);
        let t = example1_sign_targets(&g, &spec);
        let rep = measure_eigenspace_quantities(&g, &f, &[cand], &t).unwrap();
        assert!(rep.phi <= 1e-12);
        assert!(rep.epsilon <= 1e-10);
        assert!(rep.zeta <= 1e-10);
        assert!((rep.b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_orthonormal_rejected() {
        let g = two_components();
        let f = DMatrix::from_element(4, 1, 2.0);
        let t = DMatrix::from_element(4, 1, 1.0);
        assert!(matches!(
            measure_eigenspace_quantities(&g, &f, &[], &t),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn probe_row_json_nulls_infinities() {
        let rep = AssumptionReport {
            alpha: 0.0,
            beta: Expansion::Infinite,
            beta_certified: true,
            beta_tabular: Expansion::Infinite,
            p_min: 0.5,
            p_max: 0.5,
            m: 2,
            implementable: true,
            implementable_residual: 0.0,
        };
        let row = ProbeRow::new("ex", ClassTag::Linear, 2, 1.0, 0.0, Some(0.0), rep.to_map());
        let json = row.to_json().unwrap();
        assert!(json.contains("\"beta\":null"));
        assert!(json.contains("\"class\":\"linear\""));
    }
}
