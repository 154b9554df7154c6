//! Finite positive-pair graphs.
//!
//! A graph is a finite vertex set of augmented datapoints together with the
//! joint probability `joint[i][j]` of drawing `(x_i, x_j)` as a positive pair.
//! The data marginal is the row sum of the joint. Every downstream function is
//! stored as a value vector indexed by the stable vertex index.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graphs with at most this many vertices store the joint densely.
pub const DENSE_LIMIT: usize = 4096;

const SYMMETRY_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-9;

/// An augmented datum.
///
/// Negative zero is normalized to positive zero so that exact-coordinate
/// deduplication treats them as the same point.
#[derive(Debug, Clone, PartialEq)]
pub struct Datapoint(Vec<f64>);

impl Datapoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Datapoint(
            coords
                .into_iter()
                .map(|c| if c == 0.0 { 0.0 } else { c })
                .collect(),
        )
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    fn key(&self) -> Vec<u64> {
        self.0.iter().map(|c| c.to_bits()).collect()
    }
}

impl From<Vec<f64>> for Datapoint {
    fn from(v: Vec<f64>) -> Self {
        Datapoint::new(v)
    }
}

/// Compressed sparse row storage of the nonzero joint entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from unordered triplets, summing duplicates and dropping zeros.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, v) in &sorted {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: n,
                });
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEntry { i, j, value: v });
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
                continue;
            }
            cols.push(j);
            vals.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        };
        m.drop_zeros();
        Ok(m)
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// The joint positive-pair mass, dense or sparse.
#[derive(Debug, Clone, PartialEq)]
pub enum JointMatrix {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

/// Iterator over the nonzero entries `(j, value)` of one joint row.
pub enum RowEntries<'a> {
    Dense {
        row: usize,
        col: usize,
        m: &'a DMatrix<f64>,
    },
    Sparse {
        cols: &'a [usize],
        vals: &'a [f64],
        pos: usize,
    },
}

impl Iterator for RowEntries<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowEntries::Dense { row, col, m } => {
                while *col < m.ncols() {
                    let j = *col;
                    *col += 1;
                    let v = m[(*row, j)];
                    if v != 0.0 {
                        return Some((j, v));
                    }
                }
                None
            }
            RowEntries::Sparse { cols, vals, pos } => {
                if *pos < cols.len() {
                    let k = *pos;
                    *pos += 1;
                    Some((cols[k], vals[k]))
                } else {
                    None
                }
            }
        }
    }
}

impl JointMatrix {
    /// Dense storage for `n <= DENSE_LIMIT`, sparse above.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n <= DENSE_LIMIT {
            let mut m = DMatrix::zeros(n, n);
            for &(i, j, v) in triplets {
                if i >= n || j >= n {
                    return Err(Error::IndexOutOfRange {
                        index: i.max(j),
                        len: n,
                    });
                }
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEntry { i, j, value: v });
                }
                m[(i, j)] += v;
            }
            Ok(JointMatrix::Dense(m))
        } else {
            Ok(JointMatrix::Sparse(CsrMatrix::from_triplets(n, triplets)?))
        }
    }

    /// Builds a dense joint from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "joint row length",
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Ok(JointMatrix::Dense(DMatrix::from_fn(n, n, |i, j| rows[i][j])))
    }

    pub fn dim(&self) -> usize {
        match self {
            JointMatrix::Dense(m) => m.nrows(),
            JointMatrix::Sparse(s) => s.n,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            JointMatrix::Dense(m) => m[(i, j)],
            JointMatrix::Sparse(s) => s.get(i, j),
        }
    }

    pub fn row(&self, i: usize) -> RowEntries<'_> {
        match self {
            JointMatrix::Dense(m) => RowEntries::Dense { row: i, col: 0, m },
            JointMatrix::Sparse(s) => {
                let (lo, hi) = (s.row_ptr[i], s.row_ptr[i + 1]);
                RowEntries::Sparse {
                    cols: &s.cols[lo..hi],
                    vals: &s.vals[lo..hi],
                    pos: 0,
                }
            }
        }
    }

    /// Nonzero entries as `(i, j, value)` in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            out.extend(self.row(i).map(|(j, v)| (i, j, v)));
        }
        out
    }

    pub fn nnz(&self) -> usize {
        match self {
            JointMatrix::Dense(m) => m.iter().filter(|&&v| v != 0.0).count(),
            JointMatrix::Sparse(s) => s.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, JointMatrix::Sparse(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            JointMatrix::Dense(m) => m.clone(),
            JointMatrix::Sparse(s) => {
                let mut m = DMatrix::zeros(s.n, s.n);
                for i in 0..s.n {
                    for k in s.row_ptr[i]..s.row_ptr[i + 1] {
                        m[(i, s.cols[k])] = s.vals[k];
                    }
                }
                m
            }
        }
    }

    fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }
}

/// Content hash identifying a graph; functions remember which graph they live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphId(pub u64);

/// A validated finite positive-pair graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PositivePairGraph {
    dim: usize,
    vertices: Vec<Datapoint>,
    joint: JointMatrix,
    marginal: Vec<f64>,
    id: GraphId,
}

impl PositivePairGraph {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    /// Ambient dimension of the vertex coordinates.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Datapoint] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Datapoint {
        &self.vertices[i]
    }

    pub fn joint(&self) -> &JointMatrix {
        &self.joint
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    pub fn id(&self) -> GraphId {
        self.id
    }

    /// Vertex coordinates as an `n x d` matrix.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.dim, |i, j| self.vertices[i].0[j])
    }

    /// Position of a vertex with exactly these coordinates.
    pub fn find_vertex(&self, coords: &[f64]) -> Option<usize> {
        let probe = Datapoint::new(coords.to_vec());
        self.vertices.iter().position(|v| v == &probe)
    }
}

/// Validates and builds a graph; the marginal is the row sum of `joint`.
pub fn build_graph(vertices: Vec<Datapoint>, joint: JointMatrix) -> Result<PositivePairGraph> {
    let n = vertices.len();
    if n == 0 {
        return Err(Error::EmptySupport);
    }
    if joint.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "joint size vs vertex count",
            expected: n,
            found: joint.dim(),
        });
    }
    let dim = vertices[0].dim();
    for (index, v) in vertices.iter().enumerate() {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "vertex dimension",
                expected: dim,
                found: v.dim(),
            });
        }
        if !v.is_finite() {
            return Err(Error::NonFiniteCoordinate { index });
        }
    }

    let mut total = 0.0;
    for i in 0..n {
        for (j, v) in joint.row(i) {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEntry { i, j, value: v });
            }
            let back = joint.get(j, i);
            if (v - back).abs() > SYMMETRY_TOL {
                return Err(Error::AsymmetricJoint {
                    i,
                    j,
                    forward: v,
                    backward: back,
                });
            }
            total += v;
        }
    }
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum: total });
    }

    let marginal: Vec<f64> = (0..n).map(|i| joint.row_sum(i)).collect();
    if let Some(index) = marginal.iter().position(|&m| m <= 0.0) {
        return Err(Error::ZeroMassVertex { index });
    }

    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(n);
    for (i, v) in vertices.iter().enumerate() {
        if let Some(&first) = seen.get(&v.key()) {
            return Err(Error::DuplicateVertex { first, second: i });
        }
        seen.insert(v.key(), i);
    }

    let id = fingerprint(dim, &vertices, &joint);
    Ok(PositivePairGraph {
        dim,
        vertices,
        joint,
        marginal,
        id,
    })
}

fn fingerprint(dim: usize, vertices: &[Datapoint], joint: &JointMatrix) -> GraphId {
    let mut h = DefaultHasher::new();
    dim.hash(&mut h);
    vertices.len().hash(&mut h);
    for v in vertices {
        v.key().hash(&mut h);
    }
    for i in 0..joint.dim() {
        for (j, v) in joint.row(i) {
            (i, j, v.to_bits()).hash(&mut h);
        }
    }
    GraphId(h.finish())
}

/// Builds the graph induced by an augmentation process.
///
/// The joint mass is `p_pos(x, x') = sum_nat p(nat) A(x | nat) A(x' | nat)`.
/// Augmented points are deduplicated by exact coordinate match, in order of
/// first appearance.
pub fn from_augmentation_process<F>(
    naturals: &[(Datapoint, f64)],
    kernel: F,
) -> Result<PositivePairGraph>
where
    F: Fn(&Datapoint) -> Vec<(Datapoint, f64)>,
{
    if naturals.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut nat_total = 0.0;
    for (i, (_, p)) in naturals.iter().enumerate() {
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::InvalidEntry {
                i,
                j: i,
                value: *p,
            });
        }
        nat_total += p;
    }
    if (nat_total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum: nat_total });
    }

    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut vertices: Vec<Datapoint> = Vec::new();
    // per natural: its probability and the merged (vertex, prob) support
    let mut supports: Vec<(f64, Vec<(usize, f64)>)> = Vec::with_capacity(naturals.len());
    for (natural, (point, p)) in naturals.iter().enumerate() {
        let augs = kernel(point);
        if augs.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut sum = 0.0;
        let mut local: Vec<(usize, f64)> = Vec::with_capacity(augs.len());
        for (aug, q) in augs {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::KernelNotNormalized { natural, sum: q });
            }
            sum += q;
            let key = aug.key();
            let v = match index.get(&key) {
                Some(&v) => v,
                None => {
                    let v = vertices.len();
                    index.insert(key, v);
                    vertices.push(aug);
                    v
                }
            };
            match local.iter_mut().find(|(u, _)| *u == v) {
                Some(entry) => entry.1 += q,
                None => local.push((v, q)),
            }
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::KernelNotNormalized { natural, sum });
        }
        if *p > 0.0 {
            supports.push((*p, local));
        }
    }

    let n = vertices.len();
    let joint = if n <= DENSE_LIMIT {
        let mut m = DMatrix::zeros(n, n);
        for (p, local) in &supports {
            for &(a, qa) in local {
                for &(b, qb) in local {
                    m[(a, b)] += p * (qa * qb);
                }
            }
        }
        JointMatrix::Dense(m)
    } else {
        let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
        for (p, local) in &supports {
            for &(a, qa) in local {
                for &(b, qb) in local {
                    *acc.entry((a, b)).or_insert(0.0) += p * (qa * qb);
                }
            }
        }
        let triplets: Vec<(usize, usize, f64)> =
            acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
        JointMatrix::Sparse(CsrMatrix::from_triplets(n, &triplets)?)
    };
    build_graph(vertices, joint)
}

/// An m-way partition of the vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    m: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for &c in &assignment {
            if c >= m {
                return Err(Error::InvalidPartition(format!(
                    "cluster id {c} outside [0, {m})"
                )));
            }
            seen[c] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("cluster {c} is empty")));
        }
        Ok(Partition { assignment, m })
    }

    /// Partition whose cluster count is `max(id) + 1`.
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        let m = assignment.iter().max().map_or(0, |&c| c + 1);
        Partition::new(assignment, m)
    }

    pub fn single(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            m: 1,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Vertex indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// `Pr_{p_data}(x in S_c)` for every cluster.
    pub fn masses(&self, graph: &PositivePairGraph) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c] += graph.marginal()[i];
        }
        out
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Maximal connected components over edges with strictly positive mass.
///
/// Cluster ids are assigned in ascending order of each component's smallest
/// vertex index.
pub fn connected_components(graph: &PositivePairGraph) -> Partition {
    let n = graph.n();
    let mut sets = DisjointSets::new(n);
    for i in 0..n {
        for (j, v) in graph.joint().row(i) {
            if v > 0.0 && j != i {
                sets.union(i, j);
            }
        }
    }
    let mut label_of_root: HashMap<usize, usize> = HashMap::new();
    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let root = sets.find(i);
        let next = label_of_root.len();
        assignment.push(*label_of_root.entry(root).or_insert(next));
    }
    let m = label_of_root.len();
    Partition { assignment, m }
}

/// Total positive-pair mass whose endpoints fall in different clusters.
pub fn cross_cluster_mass(graph: &PositivePairGraph, partition: &Partition) -> Result<f64> {
    if partition.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "partition length",
            expected: graph.n(),
            found: partition.len(),
        });
    }
    let a = partition.assignment();
    let per_row = crate::par::map_range(graph.n(), |i| {
        graph
            .joint()
            .row(i)
            .filter(|&(j, _)| a[i] != a[j])
            .fold(0.0, |acc, (_, v)| acc + v)
    });
    Ok(per_row.into_iter().fold(0.0, |acc, v| acc + v))
}

/// Sorted, deduplicated and range-checked vertex subset.
pub(crate) fn normalize_subset(graph: &PositivePairGraph, subset: &[usize]) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&i| i >= graph.n()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: graph.n(),
        });
    }
    Ok(s)
}

/// Conditional positive-pair mass on `S x S` as local triplets plus its total.
pub(crate) fn subset_joint(
    graph: &PositivePairGraph,
    subset: &[usize],
) -> (Vec<(usize, usize, f64)>, f64) {
    let mut local_of = HashMap::with_capacity(subset.len());
    for (k, &i) in subset.iter().enumerate() {
        local_of.insert(i, k);
    }
    let mut triplets = Vec::new();
    let mut mass = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for (j, v) in graph.joint().row(i) {
            if let Some(&b) = local_of.get(&j) {
                triplets.push((a, b, v));
                mass += v;
            }
        }
    }
    (triplets, mass)
}

/// Graph conditioned on both endpoints lying in `subset`.
///
/// Vertices of the result follow the ascending order of `subset`. The joint
/// is renormalized to total mass one; the marginal is its row sum.
pub fn restrict(graph: &PositivePairGraph, subset: &[usize]) -> Result<PositivePairGraph> {
    let s = normalize_subset(graph, subset)?;
    if s.len() == graph.n() {
        return Ok(graph.clone());
    }
    let (triplets, mass) = subset_joint(graph, &s);
    if mass <= 0.0 {
        return Err(Error::ZeroConditionalMass);
    }
    let scaled: Vec<(usize, usize, f64)> =
        triplets.into_iter().map(|(i, j, v)| (i, j, v / mass)).collect();
    let joint = JointMatrix::from_triplets(s.len(), &scaled)?;
    let vertices = s.iter().map(|&i| graph.vertices[i].clone()).collect();
    build_graph(vertices, joint)
}

/// Serialized joint: dense rows, or nonzero triplets for large graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JointRepr {
    Dense(Vec<Vec<f64>>),
    Triplets { triplets: Vec<(usize, usize, f64)> },
}

/// On-disk graph layout. `labels`/`classes` are present for labeled graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub d: usize,
    pub vertices: Vec<Vec<f64>>,
    pub joint: JointRepr,
    pub marginal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
}

impl GraphFile {
    pub fn from_graph(graph: &PositivePairGraph) -> Self {
        let joint = match graph.joint() {
            JointMatrix::Dense(m) => JointRepr::Dense(
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                    .collect(),
            ),
            JointMatrix::Sparse(_) => JointRepr::Triplets {
                triplets: graph.joint().triplets(),
            },
        };
        GraphFile {
            d: graph.dim(),
            vertices: graph.vertices().iter().map(|v| v.coords().to_vec()).collect(),
            joint,
            marginal: graph.marginal().to_vec(),
            labels: None,
            classes: None,
        }
    }

    /// Validates the file contents and rebuilds the graph.
    pub fn to_graph(&self) -> Result<PositivePairGraph> {
        let n = self.vertices.len();
        for v in &self.vertices {
            if v.len() != self.d {
                return Err(Error::DimensionMismatch {
                    context: "vertex dimension vs d",
                    expected: self.d,
                    found: v.len(),
                });
            }
        }
        let joint = match &self.joint {
            JointRepr::Dense(rows) => {
                if n > DENSE_LIMIT {
                    let mut t = Vec::new();
                    for (i, r) in rows.iter().enumerate() {
                        if r.len() != n {
                            return Err(Error::DimensionMismatch {
                                context: "joint row length",
                                expected: n,
                                found: r.len(),
                            });
                        }
                        t.extend(r.iter().enumerate().map(|(j, &v)| (i, j, v)));
                    }
                    JointMatrix::from_triplets(n, &t)?
                } else {
                    if rows.len() != n {
                        return Err(Error::DimensionMismatch {
                            context: "joint size vs vertex count",
                            expected: n,
                            found: rows.len(),
                        });
                    }
                    JointMatrix::from_rows(rows)?
                }
            }
            JointRepr::Triplets { triplets } => JointMatrix::from_triplets(n, triplets)?,
        };
        let graph = build_graph(
            self.vertices.iter().cloned().map(Datapoint::new).collect(),
            joint,
        )?;
        if self.marginal.len() != n {
            return Err(Error::DimensionMismatch {
                context: "marginal length",
                expected: n,
                found: self.marginal.len(),
            });
        }
        for (i, (&stored, &computed)) in self.marginal.iter().zip(graph.marginal()).enumerate() {
            if (stored - computed).abs() > 1e-12 {
                return Err(Error::Format(format!(
                    "marginal[{i}] = {stored} disagrees with joint row sum {computed}"
                )));
            }
        }
        Ok(graph)
    }
}

pub fn graph_to_json(graph: &PositivePairGraph) -> Result<String> {
    Ok(serde_json::to_string(&GraphFile::from_graph(graph))?)
}

pub fn graph_from_json(text: &str) -> Result<PositivePairGraph> {
    let file: GraphFile = serde_json::from_str(text)?;
    file.to_graph()
}
