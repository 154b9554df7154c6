//! Laplacian of the positive-pair graph, its eigenfunctions under the
//! `p_data`-weighted inner product, and the expansion quantity `Q_S`.
//!
//! Eigenpairs are computed per connected component in the symmetric form
//! `I - D^{-1/2} W D^{-1/2}` and mapped back with `g = D^{-1/2} h`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funclass::{forward_points, grad_params_points, ClassTag, FunctionClassSpec, RepresentationModel};
use crate::par;
use crate::posgraph::{connected_components, normalize_subset, subset_joint, GraphId, PositivePairGraph};

/// Components larger than this use Lanczos instead of a dense solver.
pub const DENSE_EIGEN_LIMIT: usize = 1500;

/// A real function on the vertices of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    values: Vec<f64>,
    graph_id: GraphId,
}

impl GraphFunction {
    pub fn new(graph: &PositivePairGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.n() {
            return Err(Error::DimensionMismatch {
                context: "function length",
                expected: graph.n(),
                found: values.len(),
            });
        }
        Ok(GraphFunction {
            values,
            graph_id: graph.id(),
        })
    }

    pub fn from_fn(graph: &PositivePairGraph, f: impl FnMut(usize) -> f64) -> Self {
        GraphFunction {
            values: (0..graph.n()).map(f).collect(),
            graph_id: graph.id(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn graph_id(&self) -> GraphId {
        self.graph_id
    }

    fn check(&self, graph: &PositivePairGraph) -> Result<()> {
        if self.graph_id != graph.id() || self.values.len() != graph.n() {
            return Err(Error::GraphMismatch);
        }
        Ok(())
    }
}

/// `E_{p_data}[a b]`.
pub fn weighted_inner(graph: &PositivePairGraph, a: &[f64], b: &[f64]) -> f64 {
    graph
        .marginal()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(m, (x, y))| m * x * y)
        .sum()
}

pub fn laplacian_apply(graph: &PositivePairGraph, g: &GraphFunction) -> Result<GraphFunction> {
    g.check(graph)?;
    let v = &g.values;
    let m = graph.marginal();
    let values = par::map_range(graph.n(), |i| {
        let avg: f64 = graph.joint().row(i).map(|(j, w)| w * v[j]).sum();
        v[i] - avg / m[i]
    });
    Ok(GraphFunction {
        values,
        graph_id: graph.id(),
    })
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<GraphFunction>,
}

impl SpectralDecomposition {
    /// `n x count` matrix whose columns are the eigenfunctions.
    pub fn eigenfunction_matrix(&self) -> DMatrix<f64> {
        let n = self.eigenfunctions.first().map_or(0, |g| g.values.len());
        DMatrix::from_fn(n, self.eigenfunctions.len(), |i, c| {
            self.eigenfunctions[c].values[i]
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub dense_limit: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_limit: DENSE_EIGEN_LIMIT,
        }
    }
}

pub fn eigendecompose(graph: &PositivePairGraph, count: usize) -> Result<SpectralDecomposition> {
    eigendecompose_with(graph, count, EigenOptions::default())
}

/// Local symmetric normalized adjacency of one component, as adjacency lists.
fn component_adjacency(graph: &PositivePairGraph, members: &[usize]) -> Vec<Vec<(usize, f64)>> {
    let mut local = vec![usize::MAX; graph.n()];
    for (a, &i) in members.iter().enumerate() {
        local[i] = a;
    }
    let m = graph.marginal();
    members
        .iter()
        .map(|&i| {
            graph
                .joint()
                .row(i)
                .map(|(j, w)| (local[j], w / (m[i] * m[j]).sqrt()))
                .collect()
        })
        .collect()
}

fn sorted_dense_eigen(mat: DMatrix<f64>, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = mat.nrows();
    let eig = SymmetricEigen::try_new(mat, 1e-14, 0)
        .ok_or_else(|| Error::EigSolverFailure("dense symmetric solver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .take(count)
        .map(|c| (eig.eigenvalues[c], eig.eigenvectors.column(c).iter().copied().collect()))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Smallest `count` eigenpairs of a symmetric operator on `R^n` by Lanczos with
/// full reorthogonalization, restarting on breakdown. Vectors in `locked` are
/// deflated from the Krylov space.
fn lanczos_smallest<F>(
    n: usize,
    count: usize,
    op: &F,
    locked: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dim = n - locked.len();
    let count = count.min(dim);
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fresh = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            orthogonalize(&mut v, locked);
            orthogonalize(&mut v, basis);
            if normalize(&mut v) > 1e-10 {
                return Some(v);
            }
        }
        None
    };
    let mut basis: Vec<Vec<f64>> = vec![fresh(&[]).ok_or_else(|| {
        Error::EigSolverFailure("could not draw a start vector".into())
    })?];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut target = dim.min((2 * count + 20).max(40));
    loop {
        while alpha.len() < target && alpha.len() < basis.len() {
            let q = basis[alpha.len()].clone();
            let mut w = op(&q);
            orthogonalize(&mut w, locked);
            alpha.push(dot(&w, &q));
            if alpha.len() == dim {
                break;
            }
            let scale = dot(&w, &w).sqrt();
            for _ in 0..2 {
                orthogonalize(&mut w, &basis);
                orthogonalize(&mut w, locked);
            }
            let b = normalize(&mut w);
            if b > 1e-8 * scale.max(1e-300) {
                beta.push(b);
                basis.push(w);
            } else if let Some(v) = fresh(&basis) {
                beta.push(0.0);
                basis.push(v);
            }
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let ritz = sorted_dense_eigen(t, count)?;
        let pairs: Vec<(f64, Vec<f64>)> = ritz
            .into_iter()
            .map(|(theta, s)| {
                let mut y = vec![0.0; n];
                for (c, q) in s.iter().zip(&basis) {
                    for (yi, qi) in y.iter_mut().zip(q) {
                        *yi += c * qi;
                    }
                }
                normalize(&mut y);
                (theta, y)
            })
            .collect();
        let converged = pairs.iter().all(|(theta, y)| {
            let ay = op(y);
            let r: f64 = ay.iter().zip(y).map(|(a, b)| (a - theta * b).powi(2)).sum();
            r.sqrt() <= 1e-10
        });
        if converged || m >= dim || m < target || basis.len() <= m {
            return Ok(pairs);
        }
        target = dim.min(target * 2);
    }
}

fn sparse_component_eigen(adj: &[Vec<(usize, f64)>], count: usize, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = adj.len();
    let op = |v: &[f64]| -> Vec<f64> {
        adj.iter()
            .enumerate()
            .map(|(i, row)| v[i] - row.iter().map(|&(j, w)| w * v[j]).sum::<f64>())
            .collect()
    };
    let mut found = lanczos_smallest(n, count, &op, &[], seed)?;
    // guard against eigenvalues missed by a single Krylov sequence
    for round in 1..=4u64 {
        let largest = found.last().map_or(f64::INFINITY, |p| p.0);
        let locked: Vec<Vec<f64>> = found.iter().map(|p| p.1.clone()).collect();
        let extra = lanczos_smallest(n, 1, &op, &locked, seed.wrapping_add(round))?;
        match extra.first() {
            Some((theta, v)) if *theta < largest - 1e-9 => {
                found.push((*theta, v.clone()));
                found.sort_by(|a, b| a.0.total_cmp(&b.0));
                found.truncate(count);
            }
            _ => break,
        }
    }
    Ok(found)
}

/// The `count` smallest eigenpairs with explicit solver options.
pub fn eigendecompose_with(
    graph: &PositivePairGraph,
    count: usize,
    options: EigenOptions,
) -> Result<SpectralDecomposition> {
    let n = graph.n();
    if count > n {
        return Err(Error::DimensionMismatch {
            context: "eigenpair count",
            expected: n,
            found: count,
        });
    }
    let members = connected_components(graph).members();
    let per_component = par::map_slice(&members, |comp| -> Result<Vec<(f64, Vec<f64>)>> {
        let adj = component_adjacency(graph, comp);
        let take = count.min(comp.len());
        if comp.len() <= options.dense_limit {
            let q = comp.len();
            let mut mat = DMatrix::identity(q, q);
            for (a, row) in adj.iter().enumerate() {
                for &(b, w) in row {
                    mat[(a, b)] -= w;
                }
            }
            sorted_dense_eigen(mat, take)
        } else {
            sparse_component_eigen(&adj, take, comp[0] as u64)
        }
    });
    let mut all: Vec<(f64, usize, usize, Vec<f64>)> = Vec::new();
    for (c, res) in per_component.into_iter().enumerate() {
        for (idx, (val, vec)) in res?.into_iter().enumerate() {
            all.push((val, c, idx, vec));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    all.truncate(count);

    let m = graph.marginal();
    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenfunctions = Vec::with_capacity(count);
    for (val, c, _, h) in all {
        let mut values = vec![0.0; n];
        for (&i, hv) in members[c].iter().zip(&h) {
            values[i] = hv / m[i].sqrt();
        }
        if values.iter().find(|v| v.abs() > 1e-12).is_some_and(|&v| v < 0.0) {
            values.iter_mut().for_each(|v| *v = -*v);
        }
        eigenvalues.push(val);
        eigenfunctions.push(GraphFunction {
            values,
            graph_id: graph.id(),
        });
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenfunctions,
    })
}

/// `sum_ij J_ij |F_i - F_j|^2` for the rows of `f` (`n x k`).
pub fn pair_discrepancy_values(graph: &PositivePairGraph, f: &DMatrix<f64>) -> f64 {
    par::sum_range(graph.n(), |i| {
        graph
            .joint()
            .row(i)
            .map(|(j, w)| {
                let d2: f64 = (0..f.ncols()).map(|c| (f[(i, c)] - f[(j, c)]).powi(2)).sum();
                w * d2
            })
            .sum()
    })
}

pub fn pair_discrepancy(graph: &PositivePairGraph, fs: &[GraphFunction]) -> Result<f64> {
    for g in fs {
        g.check(graph)?;
    }
    let f = DMatrix::from_fn(graph.n(), fs.len(), |i, c| fs[c].values[i]);
    Ok(pair_discrepancy_values(graph, &f))
}

/// A nonnegative quantity that may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expansion {
    Finite(f64),
    Infinite,
}

impl Expansion {
    pub fn is_infinite(self) -> bool {
        matches!(self, Expansion::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Expansion::Finite(v) => Some(v),
            Expansion::Infinite => None,
        }
    }

    pub fn min(self, other: Expansion) -> Expansion {
        match (self, other) {
            (Expansion::Finite(a), Expansion::Finite(b)) => Expansion::Finite(a.min(b)),
            (Expansion::Infinite, x) | (x, Expansion::Infinite) => x,
        }
    }
}

impl std::fmt::Display for Expansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expansion::Finite(v) => write!(f, "{v}"),
            Expansion::Infinite => f.write_str("inf"),
        }
    }
}

/// Restricted pair law and data law on a subset.
struct SubsetLaw {
    members: Vec<usize>,
    /// Local triplets of `p_pos^S`.
    pairs: Vec<(usize, usize, f64)>,
    /// `p_data^S`: parent marginal restricted to `S` and renormalized.
    data: Vec<f64>,
}

fn subset_law(graph: &PositivePairGraph, subset: &[usize]) -> Result<SubsetLaw> {
    let members = normalize_subset(graph, subset)?;
    let (triplets, mass) = subset_joint(graph, &members);
    if mass <= 0.0 {
        return Err(Error::ZeroConditionalMass);
    }
    let pairs = triplets.into_iter().map(|(a, b, w)| (a, b, w / mass)).collect();
    let total: f64 = members.iter().map(|&i| graph.marginal()[i]).sum();
    let data = members.iter().map(|&i| graph.marginal()[i] / total).collect();
    Ok(SubsetLaw {
        members,
        pairs,
        data,
    })
}

fn ratio_on_subset(law: &SubsetLaw, g: &[f64]) -> Expansion {
    let local: Vec<f64> = law.members.iter().map(|&i| g[i]).collect();
    let lo = local.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = local.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Expansion::Infinite;
    }
    let num: f64 = law.pairs.iter().map(|&(a, b, w)| w * (local[a] - local[b]).powi(2)).sum();
    let mean: f64 = law.data.iter().zip(&local).map(|(p, v)| p * v).sum();
    let den: f64 = 2.0 * law.data.iter().zip(&local).map(|(p, v)| p * (v - mean).powi(2)).sum::<f64>();
    if den <= 0.0 {
        Expansion::Infinite
    } else {
        Expansion::Finite(num / den)
    }
}

/// `Q_S(g)`: pair discrepancy under `p_pos` conditioned on `S x S`, over
/// `E[(g(x) - g(x'))^2]` for independent `x, x'` from the data law on `S`.
pub fn expansion_q(graph: &PositivePairGraph, subset: &[usize], g: &GraphFunction) -> Result<Expansion> {
    g.check(graph)?;
    let law = subset_law(graph, subset)?;
    Ok(ratio_on_subset(&law, &g.values))
}

/// Infimum of `Q_S` over scalar functions implementable by a class.
#[derive(Debug, Clone)]
pub struct ClassExpansion {
    pub beta: Expansion,
    /// Minimizing function on the full graph (zero outside `S` for tabular).
    pub argmin: Option<GraphFunction>,
    /// Exact for tabular and linear classes; a multi-start upper estimate otherwise.
    pub certified: bool,
}

pub fn min_expansion_over_class(
    graph: &PositivePairGraph,
    subset: &[usize],
    class: &FunctionClassSpec,
) -> Result<ClassExpansion> {
    let members = normalize_subset(graph, subset)?;
    if members.len() == 1 {
        return Ok(ClassExpansion {
            beta: Expansion::Infinite,
            argmin: None,
            certified: true,
        });
    }
    let law = subset_law(graph, &members)?;
    match class.class {
        ClassTag::Tabular => tabular_min_expansion(graph, &law),
        ClassTag::Linear => linear_min_expansion(graph, &law),
        ClassTag::Relu | ClassTag::Conv => heuristic_min_expansion(graph, &law, class),
    }
}

fn tabular_min_expansion(graph: &PositivePairGraph, law: &SubsetLaw) -> Result<ClassExpansion> {
    let q = law.members.len();
    let mut lap = DMatrix::<f64>::zeros(q, q);
    for &(a, b, w) in &law.pairs {
        lap[(a, a)] += w;
        lap[(a, b)] -= w;
    }
    let inv_sqrt: Vec<f64> = law.data.iter().map(|p| 1.0 / p.sqrt()).collect();
    let row_ratio = (0..q)
        .map(|a| lap[(a, a)] * inv_sqrt[a] * inv_sqrt[a])
        .fold(0.0, f64::max);
    let shift = 4.0 * row_ratio + 1.0;
    let sq: Vec<f64> = law.data.iter().map(|p| p.sqrt()).collect();
    let mat = DMatrix::from_fn(q, q, |a, b| {
        let l = 0.5 * (lap[(a, b)] + lap[(b, a)]);
        l * inv_sqrt[a] * inv_sqrt[b] + shift * sq[a] * sq[b]
    });
    let (beta, h) = sorted_dense_eigen(mat, 1)?.remove(0);
    let mut values = vec![0.0; graph.n()];
    for (a, &i) in law.members.iter().enumerate() {
        values[i] = h[a] * inv_sqrt[a];
    }
    Ok(ClassExpansion {
        beta: Expansion::Finite(beta.max(0.0)),
        argmin: Some(GraphFunction {
            values,
            graph_id: graph.id(),
        }),
        certified: true,
    })
}

fn linear_min_expansion(graph: &PositivePairGraph, law: &SubsetLaw) -> Result<ClassExpansion> {
    let d = graph.dim();
    let x = |i: usize| DVector::from_column_slice(graph.vertex(i).coords());
    let mut a_mat = DMatrix::zeros(d, d);
    for &(a, b, w) in &law.pairs {
        let diff = x(law.members[a]) - x(law.members[b]);
        a_mat += w * &diff * diff.transpose();
    }
    let mut mean = DVector::zeros(d);
    for (p, &i) in law.data.iter().zip(&law.members) {
        mean += *p * x(i);
    }
    let mut c_mat = DMatrix::zeros(d, d);
    for (p, &i) in law.data.iter().zip(&law.members) {
        let c = x(i) - &mean;
        c_mat += 2.0 * *p * &c * c.transpose();
    }
    let eig = SymmetricEigen::new(c_mat);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if top <= 1e-14 {
        return Err(Error::DegenerateCovariance);
    }
    let keep: Vec<usize> = (0..d).filter(|&c| eig.eigenvalues[c] > 1e-12 * top).collect();
    let basis = DMatrix::from_fn(d, keep.len(), |i, c| {
        eig.eigenvectors[(i, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
    });
    let reduced = basis.transpose() * a_mat * &basis;
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let (beta, z) = sorted_dense_eigen(reduced, 1)?.remove(0);
    let w = basis * DVector::from_vec(z);
    let values = (0..graph.n()).map(|i| w.dot(&x(i))).collect();
    Ok(ClassExpansion {
        beta: Expansion::Finite(beta.max(0.0)),
        argmin: Some(GraphFunction {
            values,
            graph_id: graph.id(),
        }),
        certified: true,
    })
}

/// Multi-start gradient descent on `Q_S(w^T f(x))` over model and head.
fn heuristic_min_expansion(
    graph: &PositivePairGraph,
    law: &SubsetLaw,
    class: &FunctionClassSpec,
) -> Result<ClassExpansion> {
    let shape = class.shape_for(graph)?;
    let k = shape.k();
    let xs = DMatrix::from_fn(law.members.len(), graph.dim(), |a, j| {
        graph.vertex(law.members[a]).coords()[j]
    });
    let q = law.members.len();
    let objective = |model: &RepresentationModel, w: &[f64]| -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let f = forward_points(model, &xs)?;
        let g: Vec<f64> = (0..q).map(|a| (0..k).map(|c| f[(a, c)] * w[c]).sum()).collect();
        let mean: f64 = law.data.iter().zip(&g).map(|(p, v)| p * v).sum();
        let num: f64 = law.pairs.iter().map(|&(a, b, wt)| wt * (g[a] - g[b]).powi(2)).sum();
        let den: f64 = 2.0 * law.data.iter().zip(&g).map(|(p, v)| p * (v - mean).powi(2)).sum::<f64>();
        if den <= 1e-300 {
            return Ok((f64::INFINITY, vec![], vec![]));
        }
        let ratio = num / den;
        let mut dg = vec![0.0; q];
        for &(a, b, wt) in &law.pairs {
            dg[a] += 2.0 * wt * (g[a] - g[b]);
            dg[b] -= 2.0 * wt * (g[a] - g[b]);
        }
        for a in 0..q {
            dg[a] = (dg[a] - ratio * 4.0 * law.data[a] * (g[a] - mean)) / den;
        }
        let cot = DMatrix::from_fn(q, k, |a, c| dg[a] * w[c]);
        let gp = grad_params_points(model, &xs, &cot)?;
        let gw = (0..k).map(|c| (0..q).map(|a| dg[a] * f[(a, c)]).sum()).collect();
        Ok((ratio, gp, gw))
    };
    let starts: Vec<u64> = (0..5).collect();
    let results = par::map_slice(&starts, |&seed| -> Result<(f64, RepresentationModel, Vec<f64>)> {
        let mut model = RepresentationModel::random(shape, 1.0, 1000 + seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let mut w: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut best, mut gp, mut gw) = objective(&model, &w)?;
        let mut step = 0.1;
        for _ in 0..300 {
            if !best.is_finite() || step < 1e-12 {
                break;
            }
            let mut trial = model.clone();
            for (p, g) in trial.params_mut().iter_mut().zip(&gp) {
                *p -= step * g;
            }
            let tw: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - step * g).collect();
            let (val, ngp, ngw) = objective(&trial, &tw)?;
            if val < best {
                model = trial;
                w = tw;
                best = val;
                gp = ngp;
                gw = ngw;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        Ok((best, model, w))
    });
    let mut best: Option<(f64, RepresentationModel, Vec<f64>)> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.0 < b.0) {
            best = Some(r);
        }
    }
    let (val, model, w) = best.expect("five starts");
    if !val.is_finite() {
        return Ok(ClassExpansion {
            beta: Expansion::Infinite,
            argmin: None,
            certified: false,
        });
    }
    let f = forward_points(&model, &graph.coordinate_matrix())?;
    let values = (0..graph.n()).map(|i| (0..k).map(|c| f[(i, c)] * w[c]).sum()).collect();
    Ok(ClassExpansion {
        beta: Expansion::Finite(val),
        argmin: Some(GraphFunction {
            values,
            graph_id: graph.id(),
        }),
        certified: false,
    })
}

/// Whether `E[(psi g - Lg)^2] <= tol E[g^2]`.
pub fn is_eigenfunction(graph: &PositivePairGraph, g: &GraphFunction, psi: f64, tol: f64) -> Result<bool> {
    let lg = laplacian_apply(graph, g)?;
    let norm = weighted_inner(graph, &g.values, &g.values);
    if norm <= 0.0 {
        return Err(Error::ZeroFunction);
    }
    let resid: Vec<f64> = g.values.iter().zip(&lg.values).map(|(a, b)| psi * a - b).collect();
    Ok(weighted_inner(graph, &resid, &resid) <= tol * norm)
}

/// CSV with columns `index,eigenvalue`.
pub fn write_spectrum_csv<W: Write>(decomp: &SpectralDecomposition, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue"])?;
    for (i, v) in decomp.eigenvalues.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with one row per vertex: `vertex,g0,g1,...`.
pub fn write_eigenfunctions_csv<W: Write>(decomp: &SpectralDecomposition, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex".to_string()];
    header.extend((0..decomp.eigenfunctions.len()).map(|c| format!("g{c}")));
    w.write_record(&header)?;
    let mat = decomp.eigenfunction_matrix();
    for i in 0..mat.nrows() {
        let mut row = vec![i.to_string()];
        row.extend(mat.row(i).iter().map(|v| format!("{v:e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posgraph::{build_graph, Datapoint, JointMatrix};
    use crate::synthdata::{example1_graph, random_graph, Example1Spec};

    fn graph(rows: &[Vec<f64>]) -> PositivePairGraph {
        let n = rows.len();
        let v = (0..n).map(|i| Datapoint::new(vec![i as f64])).collect();
        build_graph(v, JointMatrix::from_rows(rows).unwrap()).unwrap()
    }

    fn uniform_pair() -> PositivePairGraph {
        graph(&[vec![0.25, 0.25], vec![0.25, 0.25]])
    }

    fn two_components() -> PositivePairGraph {
        graph(&[
            vec![0.2, 0.1, 0.0],
            vec![0.1, 0.1, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
    }

    #[test]
    fn laplacian_examples() {
        let single = graph(&[vec![1.0]]);
        let g = GraphFunction::new(&single, vec![3.0]).unwrap();
        assert_eq!(laplacian_apply(&single, &g).unwrap().values(), &[0.0]);

        let two = two_components();
        let ind = GraphFunction::new(&two, vec![1.0, 1.0, 0.0]).unwrap();
        assert!(laplacian_apply(&two, &ind).unwrap().values().iter().all(|v| v.abs() < 1e-15));

        let pair = uniform_pair();
        let g = GraphFunction::new(&pair, vec![1.0, -1.0]).unwrap();
        assert_eq!(laplacian_apply(&pair, &g).unwrap().values(), &[1.0, -1.0]);
        assert!(matches!(
            laplacian_apply(&two, &g),
            Err(Error::GraphMismatch)
        ));
    }

    #[test]
    fn eigen_examples() {
        let single = graph(&[vec![1.0]]);
        let d = eigendecompose(&single, 1).unwrap();
        assert!(d.eigenvalues[0].abs() < 1e-15);
        let pair = eigendecompose(&uniform_pair(), 2).unwrap();
        assert!(pair.eigenvalues[0].abs() < 1e-12);
        assert!((pair.eigenvalues[1] - 1.0).abs() < 1e-12);
        let two = eigendecompose(&two_components(), 3).unwrap();
        assert!(two.eigenvalues[..2].iter().all(|v| v.abs() < 1e-12));
        assert!(two.eigenvalues[2] > 0.1);
    }

    #[test]
    fn discrepancy_examples() {
        let pair = uniform_pair();
        let g = GraphFunction::new(&pair, vec![1.0, -1.0]).unwrap();
        assert_eq!(pair_discrepancy(&pair, &[g]).unwrap(), 2.0);
        let c = GraphFunction::new(&pair, vec![5.0, 5.0]).unwrap();
        assert_eq!(pair_discrepancy(&pair, &[c]).unwrap(), 0.0);
    }

    #[test]
    fn expansion_examples() {
        let pair = uniform_pair();
        let g = GraphFunction::new(&pair, vec![1.0, 0.0]).unwrap();
        assert_eq!(expansion_q(&pair, &[0, 1], &g).unwrap(), Expansion::Finite(1.0));
        let c = GraphFunction::new(&pair, vec![2.0, 2.0]).unwrap();
        assert!(expansion_q(&pair, &[0, 1], &c).unwrap().is_infinite());
        let two = two_components();
        let split = GraphFunction::new(&two, vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(expansion_q(&two, &[0, 1, 2], &split).unwrap(), Expansion::Finite(0.0));
        assert!(matches!(expansion_q(&two, &[], &split), Err(Error::EmptySubset)));
    }

    #[test]
    fn class_expansion_examples() {
        let two = two_components();
        let tab = FunctionClassSpec::new(ClassTag::Tabular, 1);
        let r = min_expansion_over_class(&two, &[0, 1, 2], &tab).unwrap();
        assert!(r.beta.finite().unwrap() < 1e-12);
        assert!(min_expansion_over_class(&two, &[2], &tab).unwrap().beta.is_infinite());

        let pair = uniform_pair();
        let r = min_expansion_over_class(&pair, &[0, 1], &tab).unwrap();
        assert!((r.beta.finite().unwrap() - 1.0).abs() < 1e-12);

        let spec = Example1Spec::new(3, 1, vec![0.5, 1.0]);
        let lg = example1_graph(&spec).unwrap();
        let base = lg.graph.find_vertex(&[1.0, 1.0, 1.0]).unwrap();
        let comps = connected_components(&lg.graph);
        let cell: Vec<usize> = (0..lg.graph.n())
            .filter(|&i| comps.assignment()[i] == comps.assignment()[base])
            .collect();
        let lin = FunctionClassSpec::new(ClassTag::Linear, 1);
        let r = min_expansion_over_class(&lg.graph, &cell, &lin).unwrap();
        assert!(r.beta.finite().unwrap() > 0.0);
    }

    #[test]
    fn tabular_beta_lower_bounds_random_functions() {
        let g = random_graph(12, 1, 0.4, 2, 5).unwrap();
        let tab = FunctionClassSpec::new(ClassTag::Tabular, 1);
        let subset: Vec<usize> = (0..8).collect();
        let beta = min_expansion_over_class(&g, &subset, &tab).unwrap();
        let b = beta.beta.finite().unwrap();
        let argmin = beta.argmin.unwrap();
        let at_argmin = expansion_q(&g, &subset, &argmin).unwrap().finite().unwrap();
        assert!((at_argmin - b).abs() < 1e-9 * (1.0 + b));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let f = GraphFunction::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
            let q = expansion_q(&g, &subset, &f).unwrap().finite().unwrap();
            assert!(q >= b - 1e-10);
        }
    }

    #[test]
    fn eigenfunction_checks() {
        let pair = uniform_pair();
        let g = GraphFunction::new(&pair, vec![1.0, -1.0]).unwrap();
        assert!(is_eigenfunction(&pair, &g, 1.0, 1e-12).unwrap());
        assert!(!is_eigenfunction(&pair, &g, 0.0, 1e-12).unwrap());
        let z = GraphFunction::new(&pair, vec![0.0, 0.0]).unwrap();
        assert!(matches!(is_eigenfunction(&pair, &z, 0.0, 1e-10), Err(Error::ZeroFunction)));
    }

    #[test]
    fn lanczos_matches_dense() {
        for seed in 0..3 {
            let g = random_graph(60, 2, 0.2, 2, seed).unwrap();
            let dense = eigendecompose(&g, 12).unwrap();
            let sparse = eigendecompose_with(&g, 12, EigenOptions { dense_limit: 5 }).unwrap();
            for (a, b) in dense.eigenvalues.iter().zip(&sparse.eigenvalues) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn spectrum_csv_has_header() {
        let d = eigendecompose(&uniform_pair(), 2).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,eigenvalue\n0,"));
        let mut buf = Vec::new();
        write_eigenfunctions_csv(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
