//! Generators for the example distributions, discretized to finite graphs.
//!
//! Continuous augmentation laws are replaced by uniform laws over explicit
//! scalar grids. All coordinates are computed from integer enumeration indices
//! so logically identical augmentations are bit-identical and deduplicate.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posgraph::{
    build_graph, from_augmentation_process, Datapoint, GraphFile, JointMatrix, Partition,
    PositivePairGraph,
};

pub const DEFAULT_SIZE_GUARD: usize = 20_000;

fn default_guard() -> usize {
    DEFAULT_SIZE_GUARD
}

/// A graph together with downstream labels in `[0, classes)`.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: PositivePairGraph,
    pub labels: Vec<usize>,
    pub classes: usize,
    /// Ground-truth grouping when the generator defines one (Example 3 sets,
    /// outer clusters of the two-level generator, components).
    pub sets: Option<Partition>,
}

impl LabeledGraph {
    pub fn new(graph: PositivePairGraph, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.len() != graph.n() {
            return Err(Error::DimensionMismatch {
                context: "label count",
                expected: graph.n(),
                found: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidSpec(format!(
                "label {bad} outside [0, {classes})"
            )));
        }
        Ok(LabeledGraph {
            graph,
            labels,
            classes,
            sets: None,
        })
    }

    /// `n x classes` matrix of one-hot targets `e_{y(x)}`.
    pub fn onehots(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.graph.n(), self.classes);
        for (i, &l) in self.labels.iter().enumerate() {
            m[(i, l)] = 1.0;
        }
        m
    }

    pub fn to_file(&self) -> GraphFile {
        let mut f = GraphFile::from_graph(&self.graph);
        f.labels = Some(self.labels.clone());
        f.classes = Some(self.classes);
        f
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    /// Reads a graph file; files without labels get a single class.
    pub fn from_file(file: &GraphFile) -> Result<Self> {
        let graph = file.to_graph()?;
        let labels = file.labels.clone().unwrap_or_else(|| vec![0; graph.n()]);
        let classes = file
            .classes
            .unwrap_or_else(|| labels.iter().max().map_or(1, |&m| m + 1));
        LabeledGraph::new(graph, labels, classes)
    }
}

/// Index of a `{-1, 1}` sign pattern read as binary, first entry most
/// significant (`+1` is bit one).
pub fn sign_pattern_index(signs: impl IntoIterator<Item = f64>) -> usize {
    signs
        .into_iter()
        .fold(0usize, |acc, v| (acc << 1) | usize::from(v > 0.0))
}

/// Inverse of [`sign_pattern_index`] for patterns of length `len`.
pub fn sign_pattern(index: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|j| {
            if (index >> (len - 1 - j)) & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

fn check_grid(grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("tau grid is empty".into()));
    }
    if grid.iter().any(|&t| !(lo..=hi).contains(&t)) {
        return Err(Error::InvalidSpec(format!(
            "tau grid values must lie in [{lo}, {hi}]"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSpec(
            "tau grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn guarded_count(factors: &[(usize, usize)], guard: usize) -> Result<usize> {
    let mut total: usize = 1;
    for &(base, exp) in factors {
        for _ in 0..exp {
            total = total.saturating_mul(base);
        }
    }
    if total > guard {
        return Err(Error::SizeGuardExceeded {
            vertices: total,
            guard,
        });
    }
    Ok(total)
}

/// Hypercube with scaled spurious dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Spec {
    pub d: usize,
    /// Number of invariant leading dimensions.
    pub s: usize,
    pub tau_grid: Vec<f64>,
    /// Zero-based invariant dimension whose sign is the label.
    #[serde(default)]
    pub label_dim: usize,
    #[serde(default = "default_guard")]
    pub size_guard: usize,
}

impl Example1Spec {
    pub fn new(d: usize, s: usize, tau_grid: Vec<f64>) -> Self {
        Example1Spec {
            d,
            s,
            tau_grid,
            label_dim: 0,
            size_guard: DEFAULT_SIZE_GUARD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.s == 0 || self.s >= self.d {
            return Err(Error::InvalidSpec(format!(
                "need 0 < s < d, got s = {}, d = {}",
                self.s, self.d
            )));
        }
        if self.label_dim >= self.s {
            return Err(Error::InvalidSpec(format!(
                "label_dim {} must be an invariant dimension (< {})",
                self.label_dim, self.s
            )));
        }
        check_grid(&self.tau_grid, 0.5, 1.0)
    }

    fn build_graph(&self) -> Result<PositivePairGraph> {
        self.validate()?;
        let (d, s) = (self.d, self.s);
        let g = self.tau_grid.len();
        let vertex_bound = guarded_count(&[(2, d), (g, d - s)], self.size_guard)?;
        log::debug!("example 1: at most {vertex_bound} vertices");
        let nat_count = 1usize << d;
        let p = 1.0 / nat_count as f64;
        let naturals: Vec<(Datapoint, f64)> = (0..nat_count)
            .map(|a| (Datapoint::new(sign_pattern(a, d)), p))
            .collect();
        let aug_count = g.pow((d - s) as u32);
        let q = 1.0 / aug_count as f64;
        let grid = &self.tau_grid;
        from_augmentation_process(&naturals, |x| {
            let base = x.coords();
            (0..aug_count)
                .map(|b| {
                    let mut coords = base.to_vec();
                    for l in 0..d - s {
                        let digit = (b / g.pow((d - s - 1 - l) as u32)) % g;
                        coords[s + l] = base[s + l] * grid[digit];
                    }
                    (Datapoint::new(coords), q)
                })
                .collect()
        })
    }
}

/// Example 1 graph with `y(x) = sgn(x_label_dim)`: class 0 for negative, 1 for positive.
pub fn example1_graph(spec: &Example1Spec) -> Result<LabeledGraph> {
    let graph = spec.build_graph()?;
    let labels = graph
        .vertices()
        .iter()
        .map(|v| usize::from(v.coords()[spec.label_dim] > 0.0))
        .collect();
    LabeledGraph::new(graph, labels, 2)
}

/// Scalar `±1` targets `sgn(x_label_dim)` as an `n x 1` matrix.
pub fn example1_sign_targets(graph: &PositivePairGraph, spec: &Example1Spec) -> DMatrix<f64> {
    DMatrix::from_fn(graph.n(), 1, |i, _| {
        graph.vertex(i).coords()[spec.label_dim].signum()
    })
}

/// A label function on sign patterns `{-1, 1}^s`, indexed by
/// [`sign_pattern_index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignLabelMap {
    pub classes: usize,
    pub table: Vec<Option<usize>>,
}

impl SignLabelMap {
    pub fn from_fn(s: usize, classes: usize, f: impl Fn(&[f64]) -> Option<usize>) -> Self {
        SignLabelMap {
            classes,
            table: (0..1usize << s).map(|i| f(&sign_pattern(i, s))).collect(),
        }
    }

    /// Sign of one pattern coordinate, negative → 0.
    pub fn sign_of(s: usize, dim: usize) -> Self {
        SignLabelMap::from_fn(s, 2, |h| Some(usize::from(h[dim] > 0.0)))
    }

    /// XOR of the signs of two pattern coordinates.
    pub fn xor(s: usize, a: usize, b: usize) -> Self {
        SignLabelMap::from_fn(s, 2, |h| Some(usize::from((h[a] > 0.0) != (h[b] > 0.0))))
    }

    /// Every pattern is its own class.
    pub fn enumerate(s: usize) -> Self {
        SignLabelMap::from_fn(s, 1 << s, |h| Some(sign_pattern_index(h.iter().copied())))
    }

    fn check(&self, s: usize) -> Result<()> {
        if self.table.len() != 1 << s {
            return Err(Error::IncompleteLabelMap {
                pattern: self.table.len().min(1 << s),
            });
        }
        for (pattern, entry) in self.table.iter().enumerate() {
            match entry {
                Some(c) if *c < self.classes => {}
                _ => return Err(Error::IncompleteLabelMap { pattern }),
            }
        }
        Ok(())
    }

    fn class_of(&self, pattern: usize) -> usize {
        self.table[pattern].expect("checked total")
    }
}

/// Example 2: the Example 1 graph with labels depending on all invariant dims.
pub fn example2_labels(spec: &Example1Spec, label_map: &SignLabelMap) -> Result<LabeledGraph> {
    label_map.check(spec.s)?;
    let graph = spec.build_graph()?;
    let labels = graph
        .vertices()
        .iter()
        .map(|v| label_map.class_of(sign_pattern_index(v.coords()[..spec.s].iter().copied())))
        .collect();
    LabeledGraph::new(graph, labels, label_map.classes)
}

/// Which same-set pairs are positive pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntraPairRule {
    /// Every pair within a set.
    AllPairs,
    /// Pairs within the same sub-cluster; one sub-cluster id per point per set.
    SubClusters(Vec<Vec<usize>>),
    /// Only self-pairs: every point is its own component.
    Isolated,
}

/// Separated sets of bounded diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example3Spec {
    pub point_sets: Vec<Vec<Vec<f64>>>,
    pub rho: f64,
    pub gamma: f64,
    pub intra_pair_rule: IntraPairRule,
    pub classes: usize,
    /// Downstream class of each set.
    pub labels: Vec<usize>,
}

impl Example3Spec {
    pub fn r(&self) -> usize {
        self.point_sets.len()
    }
}

/// `r` clusters of `q` lattice points on a segment of length `rho`, with
/// cluster centers spaced so every cross-set distance is at least `gamma`.
pub fn example3_lattice(r: usize, q: usize, d: usize, rho: f64, gamma: f64) -> Vec<Vec<Vec<f64>>> {
    let spread_axis = if d >= 2 { 1 } else { 0 };
    (0..r)
        .map(|i| {
            (0..q)
                .map(|j| {
                    let mut x = vec![0.0; d];
                    x[0] = i as f64 * (gamma + rho);
                    let offset = if q > 1 {
                        (j as f64 / (q - 1) as f64 - 0.5) * rho
                    } else {
                        0.0
                    };
                    x[spread_axis] += offset;
                    x
                })
                .collect()
        })
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn example3_graph(spec: &Example3Spec) -> Result<LabeledGraph> {
    let r = spec.r();
    if r == 0 || spec.point_sets.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptySupport);
    }
    if spec.labels.len() != r {
        return Err(Error::InvalidSpec(format!(
            "{} set labels for {r} sets",
            spec.labels.len()
        )));
    }
    let sets = &spec.point_sets;
    for (i, si) in sets.iter().enumerate() {
        for (a, x) in si.iter().enumerate() {
            for (b, y) in si.iter().enumerate().skip(a + 1) {
                let dist = distance(x, y);
                if dist > spec.rho {
                    return Err(Error::GeometryViolation {
                        a: (i, a),
                        b: (i, b),
                        distance: dist,
                        limit: spec.rho,
                        kind: "diameter",
                    });
                }
            }
            for (j, sj) in sets.iter().enumerate().skip(i + 1) {
                for (b, y) in sj.iter().enumerate() {
                    let dist = distance(x, y);
                    if dist < spec.gamma {
                        return Err(Error::GeometryViolation {
                            a: (i, a),
                            b: (j, b),
                            distance: dist,
                            limit: spec.gamma,
                            kind: "separation",
                        });
                    }
                }
            }
        }
    }

    let mut vertices = Vec::new();
    let mut set_of = Vec::new();
    let mut triplets = Vec::new();
    for (i, si) in sets.iter().enumerate() {
        let q = si.len();
        let p_point = 1.0 / (r as f64 * q as f64);
        let base = vertices.len();
        let groups: Vec<usize> = match &spec.intra_pair_rule {
            IntraPairRule::AllPairs => vec![0; q],
            IntraPairRule::Isolated => (0..q).collect(),
            IntraPairRule::SubClusters(ids) => {
                let g = ids.get(i).ok_or_else(|| {
                    Error::InvalidSpec(format!("no sub-cluster ids for set {i}"))
                })?;
                if g.len() != q {
                    return Err(Error::InvalidSpec(format!(
                        "set {i}: {} sub-cluster ids for {q} points",
                        g.len()
                    )));
                }
                g.clone()
            }
        };
        for a in 0..q {
            let size = groups.iter().filter(|&&c| c == groups[a]).count();
            for b in 0..q {
                if groups[a] == groups[b] {
                    triplets.push((base + a, base + b, p_point / size as f64));
                }
            }
        }
        for x in si {
            vertices.push(Datapoint::new(x.clone()));
            set_of.push(i);
        }
    }
    let n = vertices.len();
    let graph = build_graph(vertices, JointMatrix::from_triplets(n, &triplets)?)?;
    let labels = set_of.iter().map(|&i| spec.labels[i]).collect();
    let mut lg = LabeledGraph::new(graph, labels, spec.classes)?;
    lg.sets = Some(Partition::new(set_of, r)?);
    Ok(lg)
}

/// Informative patch of magnitude `gamma` at a variable circular location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example4Spec {
    pub d: usize,
    /// Patch length.
    pub s: usize,
    pub gamma: f64,
    pub tau_grid: Vec<f64>,
    /// Label of each patch sign pattern.
    pub label_map: SignLabelMap,
    #[serde(default = "default_guard")]
    pub size_guard: usize,
}

impl Example4Spec {
    pub fn new(d: usize, s: usize, gamma: f64, tau_grid: Vec<f64>) -> Self {
        Example4Spec {
            d,
            s,
            gamma,
            tau_grid,
            label_map: SignLabelMap::sign_of(s, 0),
            size_guard: DEFAULT_SIZE_GUARD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 || self.s >= self.d {
            return Err(Error::InvalidSpec(format!(
                "need 0 < s < d, got s = {}, d = {}",
                self.s, self.d
            )));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "patch magnitude must exceed 1, got {}",
                self.gamma
            )));
        }
        self.label_map.check(self.s)?;
        check_grid(&self.tau_grid, 0.0, 1.0)
    }

    /// Circular positions covered by the patch starting at `t`.
    pub fn patch_positions(&self, t: usize) -> Vec<usize> {
        (0..self.s).map(|j| (t + j) % self.d).collect()
    }

    /// Patch location and sign-pattern index of a generated point.
    pub fn locate_patch(&self, coords: &[f64]) -> Option<(usize, usize)> {
        (0..self.d).find_map(|t| {
            let pos = self.patch_positions(t);
            if pos.iter().all(|&p| coords[p].abs() == self.gamma)
                && coords
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| !pos.contains(p))
                    .all(|(_, c)| c.abs() <= 1.0)
            {
                Some((t, sign_pattern_index(pos.iter().map(|&p| coords[p]))))
            } else {
                None
            }
        })
    }
}

pub fn example4_graph(spec: &Example4Spec) -> Result<LabeledGraph> {
    spec.validate()?;
    let (d, s) = (spec.d, spec.s);
    let g = spec.tau_grid.len();
    guarded_count(&[(d, 1), (2, d), (g, d - s)], spec.size_guard)?;
    let nat_count = d << d;
    let p = 1.0 / nat_count as f64;
    let mut naturals = Vec::with_capacity(nat_count);
    for t in 0..d {
        let pos = spec.patch_positions(t);
        let spurious: Vec<usize> = (0..d).filter(|i| !pos.contains(i)).collect();
        for patch in 0..1usize << s {
            let h = sign_pattern(patch, s);
            for spur in 0..1usize << (d - s) {
                let signs = sign_pattern(spur, d - s);
                let mut x = vec![0.0; d];
                for (j, &pj) in pos.iter().enumerate() {
                    x[pj] = spec.gamma * h[j];
                }
                for (l, &pl) in spurious.iter().enumerate() {
                    x[pl] = signs[l];
                }
                naturals.push((Datapoint::new(x), p));
            }
        }
    }
    let aug_count = g.pow((d - s) as u32);
    let q = 1.0 / aug_count as f64;
    let graph = from_augmentation_process(&naturals, |x| {
        let base = x.coords();
        let spurious: Vec<usize> = (0..d).filter(|&i| base[i].abs() <= 1.0).collect();
        (0..aug_count)
            .map(|b| {
                let mut coords = base.to_vec();
                for (l, &pl) in spurious.iter().enumerate() {
                    let digit = (b / g.pow((d - s - 1 - l) as u32)) % g;
                    coords[pl] = base[pl] * spec.tau_grid[digit];
                }
                (Datapoint::new(coords), q)
            })
            .collect()
    })?;
    let mut labels = Vec::with_capacity(graph.n());
    for (i, v) in graph.vertices().iter().enumerate() {
        let (_, patch) = spec.locate_patch(v.coords()).ok_or_else(|| {
            Error::InvalidSpec(format!("vertex {i} has no recognizable patch"))
        })?;
        labels.push(spec.label_map.class_of(patch));
    }
    LabeledGraph::new(graph, labels, spec.label_map.classes)
}

/// Outer clusters made of XOR-arranged inner sub-clusters.
///
/// Coordinates are `[scale * e_c, z]` with `z in R^2`. Each outer cluster
/// holds two disconnected sub-clusters: one around `{(1,1), (-1,-1)}`, the
/// other around `{(1,-1), (-1,1)}`. No linear function of `x` separates
/// them, while the outer one-hot `e_c` is linear. `cross_mass` is spread over
/// a few random edges between different outer clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelSpec {
    pub clusters: usize,
    /// Jittered copies of each of the four XOR corners.
    pub copies: usize,
    pub cross_mass: f64,
    pub cross_edges: usize,
    pub jitter: f64,
    pub seed: u64,
}

impl TwoLevelSpec {
    pub fn new(clusters: usize, cross_mass: f64, seed: u64) -> Self {
        TwoLevelSpec {
            clusters,
            copies: 3,
            cross_mass,
            cross_edges: 4,
            jitter: 0.1,
            seed,
        }
    }
}

pub fn two_level_cluster_graph(spec: &TwoLevelSpec) -> Result<LabeledGraph> {
    let m = spec.clusters;
    if m < 2 || spec.copies == 0 {
        return Err(Error::InvalidSpec(
            "need at least two clusters and one copy per corner".into(),
        ));
    }
    if !(0.0..1.0).contains(&spec.cross_mass) {
        return Err(Error::InvalidSpec("cross mass must lie in [0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = m + 2;
    let corners = [[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]];
    let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.7..1.3)).collect();
    let wsum: f64 = weights.iter().sum();

    let mut vertices = Vec::new();
    let mut outer = Vec::new();
    let mut triplets = Vec::new();
    for c in 0..m {
        let cluster_mass = (1.0 - spec.cross_mass) * weights[c] / wsum;
        for sub in 0..2 {
            let start = vertices.len();
            for corner in &corners[2 * sub..2 * sub + 2] {
                for _ in 0..spec.copies {
                    let mut x = vec![0.0; d];
                    x[c] = 1.0;
                    x[m] = corner[0] + rng.gen_range(-spec.jitter..=spec.jitter);
                    x[m + 1] = corner[1] + rng.gen_range(-spec.jitter..=spec.jitter);
                    vertices.push(Datapoint::new(x));
                    outer.push(c);
                }
            }
            let size = vertices.len() - start;
            let mut w = vec![0.0; size * size];
            for a in 0..size {
                for b in a..size {
                    let v = rng.gen_range(0.5..1.5);
                    w[a * size + b] = v;
                    w[b * size + a] = v;
                }
            }
            let total: f64 = w.iter().sum();
            for a in 0..size {
                for b in 0..size {
                    triplets.push((start + a, start + b, 0.5 * cluster_mass * w[a * size + b] / total));
                }
            }
        }
    }
    let n = vertices.len();
    if spec.cross_mass > 0.0 {
        let edges = spec.cross_edges.max(1);
        let per_edge = spec.cross_mass / (2.0 * edges as f64);
        let mut placed = 0;
        while placed < edges {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if outer[a] == outer[b] {
                continue;
            }
            triplets.push((a, b, per_edge));
            triplets.push((b, a, per_edge));
            placed += 1;
        }
    }
    let graph = build_graph(vertices, JointMatrix::from_triplets(n, &triplets)?)?;
    let mut lg = LabeledGraph::new(graph, outer.clone(), m)?;
    lg.sets = Some(Partition::new(outer, m)?);
    Ok(lg)
}

/// Disjoint dense random components with random coordinates in `[-1, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentGraphSpec {
    pub components: usize,
    pub size: usize,
    pub d: usize,
    /// Probability that an off-diagonal pair inside a component is an edge;
    /// a spanning path keeps every component connected.
    pub density: f64,
    pub seed: u64,
}

pub fn component_graph(spec: &ComponentGraphSpec) -> Result<LabeledGraph> {
    if spec.components == 0 || spec.size == 0 || spec.d == 0 {
        return Err(Error::InvalidSpec(
            "components, size and d must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.components * spec.size;
    let mut vertices = Vec::with_capacity(n);
    let mut comp = Vec::with_capacity(n);
    let mut triplets = Vec::new();
    for c in 0..spec.components {
        let start = c * spec.size;
        for _ in 0..spec.size {
            vertices.push(Datapoint::new(
                (0..spec.d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            ));
            comp.push(c);
        }
        for a in 0..spec.size {
            for b in a..spec.size {
                let edge = b == a + 1 || (b > a && rng.gen_bool(spec.density.clamp(0.0, 1.0)));
                if edge {
                    let w = rng.gen_range(0.5..1.5);
                    triplets.push((start + a, start + b, w));
                    triplets.push((start + b, start + a, w));
                } else if a == b && spec.size == 1 {
                    triplets.push((start + a, start + a, 1.0));
                }
            }
        }
    }
    let total: f64 = triplets.iter().map(|t| t.2).sum();
    let scaled: Vec<_> = triplets.into_iter().map(|(i, j, v)| (i, j, v / total)).collect();
    let graph = build_graph(vertices, JointMatrix::from_triplets(n, &scaled)?)?;
    let mut lg = LabeledGraph::new(graph, comp.clone(), spec.components)?;
    lg.sets = Some(Partition::new(comp, spec.components)?);
    Ok(lg)
}

/// A random graph on `n` vertices: random positive weights on a spanning path
/// plus each other pair independently with probability `density`.
/// With `components > 1` vertices are dealt round-robin into that many
/// disconnected groups.
pub fn random_graph(
    n: usize,
    components: usize,
    density: f64,
    d: usize,
    seed: u64,
) -> Result<PositivePairGraph> {
    if n == 0 || components == 0 || components > n {
        return Err(Error::InvalidSpec(
            "need 0 < components <= n".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = |i: usize| i % components;
    let mut triplets = Vec::new();
    for i in 0..n {
        // self-loop weight keeps single-vertex groups valid
        if rng.gen_bool(0.3) || n / components <= 1 {
            triplets.push((i, i, rng.gen_range(0.1..1.0)));
        }
        if i + components < n {
            let w = rng.gen_range(0.2..1.0);
            triplets.push((i, i + components, w));
            triplets.push((i + components, i, w));
        }
        for j in i + 1..n {
            if group(i) == group(j) && j != i + components && rng.gen_bool(density.clamp(0.0, 1.0)) {
                let w = rng.gen_range(0.1..1.0);
                triplets.push((i, j, w));
                triplets.push((j, i, w));
            }
        }
    }
    let total: f64 = triplets.iter().map(|t| t.2).sum();
    let scaled: Vec<_> = triplets.into_iter().map(|(i, j, v)| (i, j, v / total)).collect();
    let vertices = (0..n)
        .map(|_| Datapoint::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    build_graph(vertices, JointMatrix::from_triplets(n, &scaled)?)
}
