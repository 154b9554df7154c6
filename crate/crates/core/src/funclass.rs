//! Representation model classes: tabular, linear, one-layer ReLU and
//! one-layer circular convolution.
//!
//! Parameters are stored flat and row-major:
//! tabular `n x k`, linear `U (k x d)`, relu `U (k x d)` then `b (k)`,
//! conv `U (k x s)` then `b (k)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::posgraph::{Partition, PositivePairGraph};
use crate::synthdata::{sign_pattern, sign_pattern_index, Example1Spec, Example4Spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Tabular,
    Linear,
    Relu,
    Conv,
}

impl ClassTag {
    pub fn name(self) -> &'static str {
        match self {
            ClassTag::Tabular => "tabular",
            ClassTag::Linear => "linear",
            ClassTag::Relu => "relu",
            ClassTag::Conv => "conv",
        }
    }

    /// Whether the training objective is nonconvex in the parameters.
    pub fn is_nonconvex(self) -> bool {
        matches!(self, ClassTag::Relu | ClassTag::Conv)
    }
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Tabular { n: usize, k: usize },
    Linear { k: usize, d: usize },
    Relu { k: usize, d: usize },
    Conv { k: usize, s: usize, d: usize },
}

impl Shape {
    pub fn tag(&self) -> ClassTag {
        match self {
            Shape::Tabular { .. } => ClassTag::Tabular,
            Shape::Linear { .. } => ClassTag::Linear,
            Shape::Relu { .. } => ClassTag::Relu,
            Shape::Conv { .. } => ClassTag::Conv,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Shape::Tabular { k, .. }
            | Shape::Linear { k, .. }
            | Shape::Relu { k, .. }
            | Shape::Conv { k, .. } => k,
        }
    }

    pub fn param_count(&self) -> usize {
        match *self {
            Shape::Tabular { n, k } => n * k,
            Shape::Linear { k, d } => k * d,
            Shape::Relu { k, d } => k * d + k,
            Shape::Conv { k, s, .. } => k * s + k,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Tabular { n, k } => n >= 1 && k >= 1,
            Shape::Linear { k, d } | Shape::Relu { k, d } => k >= 1 && d >= 1,
            Shape::Conv { k, s, d } => k >= 1 && s >= 1 && s <= d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!("invalid shape {self:?}")))
        }
    }
}

/// A function class with its structural parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionClassSpec {
    pub class: ClassTag,
    pub k: usize,
    /// Ambient dimension; taken from the graph when absent.
    #[serde(default)]
    pub d: Option<usize>,
    /// Patch length for the conv class.
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub lipschitz_kappa: Option<f64>,
}

impl FunctionClassSpec {
    pub fn new(class: ClassTag, k: usize) -> Self {
        FunctionClassSpec {
            class,
            k,
            d: None,
            s: None,
            lipschitz_kappa: None,
        }
    }

    pub fn conv(k: usize, s: usize) -> Self {
        FunctionClassSpec {
            s: Some(s),
            ..FunctionClassSpec::new(ClassTag::Conv, k)
        }
    }

    pub fn with_k(&self, k: usize) -> Self {
        FunctionClassSpec { k, ..self.clone() }
    }

    /// The parameter shape for a graph, checking dimensions.
    pub fn shape_for(&self, graph: &PositivePairGraph) -> Result<Shape> {
        let d = graph.dim();
        if let Some(sd) = self.d {
            if sd != d {
                return Err(Error::DimensionMismatch {
                    context: "class input dimension",
                    expected: sd,
                    found: d,
                });
            }
        }
        let shape = match self.class {
            ClassTag::Tabular => Shape::Tabular {
                n: graph.n(),
                k: self.k,
            },
            ClassTag::Linear => Shape::Linear { k: self.k, d },
            ClassTag::Relu => Shape::Relu { k: self.k, d },
            ClassTag::Conv => Shape::Conv {
                k: self.k,
                s: self
                    .s
                    .ok_or_else(|| Error::SpecMismatch("conv class needs a patch length s".into()))?,
                d,
            },
        };
        shape.validate()?;
        Ok(shape)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationModel {
    shape: Shape,
    params: Vec<f64>,
}

impl RepresentationModel {
    pub fn new(shape: Shape, params: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if params.len() != shape.param_count() {
            return Err(Error::DimensionMismatch {
                context: "parameter count",
                expected: shape.param_count(),
                found: params.len(),
            });
        }
        Ok(RepresentationModel { shape, params })
    }

    pub fn zeros(shape: Shape) -> Result<Self> {
        RepresentationModel::new(shape, vec![0.0; shape.param_count()])
    }

    /// Entries i.i.d. uniform in `[-init_scale, init_scale]`.
    pub fn random(shape: Shape, init_scale: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..shape.param_count())
            .map(|_| {
                if init_scale > 0.0 {
                    rng.gen_range(-init_scale..=init_scale)
                } else {
                    0.0
                }
            })
            .collect();
        RepresentationModel::new(shape, params)
    }

    /// Tabular model whose row `i` is row `i` of `values`.
    pub fn tabular(values: &DMatrix<f64>) -> Result<Self> {
        let (n, k) = values.shape();
        let params = (0..n).flat_map(|i| (0..k).map(move |c| values[(i, c)])).collect();
        RepresentationModel::new(Shape::Tabular { n, k }, params)
    }

    /// Linear model `f(x) = U x`.
    pub fn linear(u: &DMatrix<f64>) -> Result<Self> {
        let (k, d) = u.shape();
        RepresentationModel::new(Shape::Linear { k, d }, row_major(u))
    }

    pub fn relu(u: &DMatrix<f64>, b: &[f64]) -> Result<Self> {
        let (k, d) = u.shape();
        let mut params = row_major(u);
        params.extend_from_slice(b);
        RepresentationModel::new(Shape::Relu { k, d }, params)
    }

    pub fn conv(u: &DMatrix<f64>, b: &[f64], d: usize) -> Result<Self> {
        let (k, s) = u.shape();
        let mut params = row_major(u);
        params.extend_from_slice(b);
        RepresentationModel::new(Shape::Conv { k, s, d }, params)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn class_tag(&self) -> ClassTag {
        self.shape.tag()
    }

    pub fn out_dim(&self) -> usize {
        self.shape.k()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Weight matrix (`k x d`, `k x s`, or the tabular `n x k` table).
    pub fn weights(&self) -> DMatrix<f64> {
        match self.shape {
            Shape::Tabular { n, k } => DMatrix::from_row_slice(n, k, &self.params),
            Shape::Linear { k, d } | Shape::Relu { k, d } => {
                DMatrix::from_row_slice(k, d, &self.params[..k * d])
            }
            Shape::Conv { k, s, .. } => DMatrix::from_row_slice(k, s, &self.params[..k * s]),
        }
    }

    /// Bias vector for relu and conv models.
    pub fn bias(&self) -> &[f64] {
        match self.shape {
            Shape::Relu { k, d } => &self.params[k * d..],
            Shape::Conv { k, s, .. } => &self.params[k * s..],
            _ => &[],
        }
    }

    pub fn to_file(&self) -> ModelFile {
        let (n, d, s) = match self.shape {
            Shape::Tabular { n, .. } => (Some(n), None, None),
            Shape::Linear { d, .. } | Shape::Relu { d, .. } => (None, Some(d), None),
            Shape::Conv { s, d, .. } => (None, Some(d), Some(s)),
        };
        ModelFile {
            class: self.class_tag(),
            shape: ShapeDims {
                k: self.out_dim(),
                n,
                d,
                s,
            },
            params: self.params.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.to_model()
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDims {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
}

/// On-disk model: `{"class", "shape", "params"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub class: ClassTag,
    pub shape: ShapeDims,
    pub params: Vec<f64>,
}

impl ModelFile {
    pub fn to_model(&self) -> Result<RepresentationModel> {
        let missing = |what: &str| Error::Format(format!("{} model shape lacks {what}", self.class));
        let k = self.shape.k;
        let shape = match self.class {
            ClassTag::Tabular => Shape::Tabular {
                n: self.shape.n.ok_or_else(|| missing("n"))?,
                k,
            },
            ClassTag::Linear => Shape::Linear {
                k,
                d: self.shape.d.ok_or_else(|| missing("d"))?,
            },
            ClassTag::Relu => Shape::Relu {
                k,
                d: self.shape.d.ok_or_else(|| missing("d"))?,
            },
            ClassTag::Conv => Shape::Conv {
                k,
                s: self.shape.s.ok_or_else(|| missing("s"))?,
                d: self.shape.d.ok_or_else(|| missing("d"))?,
            },
        };
        RepresentationModel::new(shape, self.params.clone())
    }
}

fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

fn check_input(model: &RepresentationModel, n: usize, d: usize) -> Result<()> {
    let (expected, found, context) = match model.shape {
        Shape::Tabular { n: mn, .. } => (mn, n, "tabular vertex count"),
        Shape::Linear { d: md, .. } | Shape::Relu { d: md, .. } | Shape::Conv { d: md, .. } => {
            (md, d, "model input dimension")
        }
    };
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

fn conv_pre(u: &[f64], b: f64, x: &[f64], t: usize) -> f64 {
    let d = x.len();
    u.iter()
        .enumerate()
        .map(|(j, uj)| uj * x[(t + j) % d])
        .sum::<f64>()
        + b
}

/// Representations of the rows of `x` (`n x d`).
pub fn forward_points(model: &RepresentationModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, d) = x.shape();
    check_input(model, n, d)?;
    let k = model.out_dim();
    Ok(match model.shape {
        Shape::Tabular { .. } => model.weights(),
        Shape::Linear { .. } => x * model.weights().transpose(),
        Shape::Relu { .. } => {
            let mut z = x * model.weights().transpose();
            let b = model.bias();
            for i in 0..n {
                for c in 0..k {
                    z[(i, c)] = relu(z[(i, c)] + b[c]);
                }
            }
            z
        }
        Shape::Conv { s, .. } => {
            let p = &model.params;
            let rows = par::map_range(n, |i| {
                let xi: Vec<f64> = x.row(i).iter().copied().collect();
                (0..k)
                    .map(|c| {
                        let u = &p[c * s..(c + 1) * s];
                        let bc = p[k * s + c];
                        (0..d).map(|t| relu(conv_pre(u, bc, &xi, t))).sum::<f64>()
                    })
                    .collect::<Vec<f64>>()
            });
            DMatrix::from_fn(n, k, |i, c| rows[i][c])
        }
    })
}

/// `n x k` matrix of representations of every vertex.
pub fn forward(model: &RepresentationModel, graph: &PositivePairGraph) -> Result<DMatrix<f64>> {
    forward_points(model, &graph.coordinate_matrix())
}

/// Gradient of `<forward(model, x), cotangent>` with respect to the parameters.
pub fn grad_params_points(
    model: &RepresentationModel,
    x: &DMatrix<f64>,
    cotangent: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let (n, d) = x.shape();
    check_input(model, n, d)?;
    let k = model.out_dim();
    if cotangent.shape() != (n, k) {
        return Err(Error::DimensionMismatch {
            context: "cotangent rows x columns",
            expected: n * k,
            found: cotangent.nrows() * cotangent.ncols(),
        });
    }
    Ok(match model.shape {
        Shape::Tabular { .. } => row_major(cotangent),
        Shape::Linear { .. } => row_major(&(cotangent.transpose() * x)),
        Shape::Relu { .. } => {
            let z = x * model.weights().transpose();
            let b = model.bias();
            let g = DMatrix::from_fn(n, k, |i, c| {
                if z[(i, c)] + b[c] > 0.0 {
                    cotangent[(i, c)]
                } else {
                    0.0
                }
            });
            let mut out = row_major(&(g.transpose() * x));
            out.extend((0..k).map(|c| g.column(c).iter().sum::<f64>()));
            out
        }
        Shape::Conv { s, .. } => {
            let p = &model.params;
            let per_vertex = par::map_range(n, |i| {
                let xi: Vec<f64> = x.row(i).iter().copied().collect();
                let mut gi = vec![0.0; k * s + k];
                for c in 0..k {
                    let ci = cotangent[(i, c)];
                    if ci == 0.0 {
                        continue;
                    }
                    let u = &p[c * s..(c + 1) * s];
                    let bc = p[k * s + c];
                    for t in 0..d {
                        if conv_pre(u, bc, &xi, t) > 0.0 {
                            for j in 0..s {
                                gi[c * s + j] += ci * xi[(t + j) % d];
                            }
                            gi[k * s + c] += ci;
                        }
                    }
                }
                gi
            });
            let mut out = vec![0.0; k * s + k];
            for gi in &per_vertex {
                for (o, v) in out.iter_mut().zip(gi) {
                    *o += v;
                }
            }
            out
        }
    })
}

pub fn grad_params(
    model: &RepresentationModel,
    graph: &PositivePairGraph,
    cotangent: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    grad_params_points(model, &graph.coordinate_matrix(), cotangent)
}

/// Largest ratio `|f(x) - f(x')| / |x - x'|` over distinct vertex pairs.
pub fn lipschitz_constant(model: &RepresentationModel, graph: &PositivePairGraph) -> Result<f64> {
    let f = forward(model, graph)?;
    Ok(lipschitz_of_values(&f, graph))
}

/// [`lipschitz_constant`] for precomputed representations.
pub fn lipschitz_of_values(f: &DMatrix<f64>, graph: &PositivePairGraph) -> f64 {
    let n = graph.n();
    let x = graph.coordinate_matrix();
    par::map_range(n, |i| {
        let mut best: f64 = 0.0;
        for j in i + 1..n {
            let dx = (x.row(i) - x.row(j)).norm();
            if dx > 0.0 {
                best = best.max((f.row(i) - f.row(j)).norm() / dx);
            }
        }
        best
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// How a construction's bias was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasSource {
    Displayed,
    Solved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub model: RepresentationModel,
    pub bias: BiasSource,
}

/// Checks `forward(model) == expected` at every vertex.
pub fn verify_outputs(
    model: &RepresentationModel,
    graph: &PositivePairGraph,
    expected: &DMatrix<f64>,
    tol: f64,
) -> Result<()> {
    let f = forward(model, graph)?;
    for i in 0..graph.n() {
        for c in 0..f.ncols() {
            let (got, want) = (f[(i, c)], expected[(i, c)]);
            if !((got - want).abs() <= tol * (1.0 + want.abs())) {
                return Err(Error::ConstructionVerificationFailed {
                    vertex: i,
                    detail: format!("output {c} is {got}, expected {want}"),
                });
            }
        }
    }
    Ok(())
}

const VERIFY_TOL: f64 = 1e-12;

/// Linear model with rows `e_1 .. e_s`.
pub fn construct_example1_optimal(spec: &Example1Spec, k: usize) -> Result<RepresentationModel> {
    spec.validate()?;
    if k != spec.s {
        return Err(Error::SpecMismatch(format!(
            "construction needs k = s = {}, got {k}",
            spec.s
        )));
    }
    RepresentationModel::linear(&DMatrix::from_fn(k, spec.d, |i, j| f64::from(u8::from(i == j))))
}

fn pattern_onehots(patterns: &[usize], k: usize) -> DMatrix<f64> {
    let scale = (k as f64).sqrt();
    DMatrix::from_fn(patterns.len(), k, |i, c| if patterns[i] == c { scale } else { 0.0 })
}

/// Per unit, the bias that makes every matching vertex output `sqrt(k)`.
fn solve_bias(
    pre: &DMatrix<f64>,
    patterns: &[usize],
    target: f64,
) -> Vec<f64> {
    (0..pre.ncols())
        .map(|c| {
            let best = patterns
                .iter()
                .enumerate()
                .filter(|(_, &p)| p == c)
                .map(|(i, _)| pre[(i, c)])
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                target - best
            } else {
                -target
            }
        })
        .collect()
}

/// ReLU model outputting `sqrt(k) e_bin(x_{1:s})`, `k = 2^s`.
///
/// The displayed bias `-sqrt(k) (r - 1)` is tried first with the given `r`;
/// if exhaustive verification fails the bias is solved per unit.
pub fn construct_example2_optimal(
    spec: &Example1Spec,
    graph: &PositivePairGraph,
    k: usize,
    r: usize,
) -> Result<Construction> {
    spec.validate()?;
    let s = spec.s;
    if k != 1 << s {
        return Err(Error::SpecMismatch(format!("construction needs k = 2^s = {}, got {k}", 1 << s)));
    }
    if graph.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            context: "graph dimension",
            expected: spec.d,
            found: graph.dim(),
        });
    }
    let sk = (k as f64).sqrt();
    let u = DMatrix::from_fn(k, spec.d, |i, j| if j < s { sk * sign_pattern(i, s)[j] } else { 0.0 });
    let patterns: Vec<usize> = graph
        .vertices()
        .iter()
        .map(|v| sign_pattern_index(v.coords()[..s].iter().copied()))
        .collect();
    let expected = pattern_onehots(&patterns, k);

    let displayed = vec![-sk * (r as f64 - 1.0); k];
    let model = RepresentationModel::relu(&u, &displayed)?;
    if verify_outputs(&model, graph, &expected, VERIFY_TOL).is_ok() {
        return Ok(Construction {
            model,
            bias: BiasSource::Displayed,
        });
    }
    log::info!("displayed bias failed verification; solving per unit");
    let pre = graph.coordinate_matrix() * u.transpose();
    let solved = solve_bias(&pre, &patterns, sk);
    let model = RepresentationModel::relu(&u, &solved)?;
    verify_outputs(&model, graph, &expected, VERIFY_TOL)?;
    Ok(Construction {
        model,
        bias: BiasSource::Solved,
    })
}

fn example4_patches(spec: &Example4Spec, graph: &PositivePairGraph) -> Result<Vec<(usize, usize)>> {
    graph
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            spec.locate_patch(v.coords())
                .ok_or_else(|| Error::ConstructionVerificationFailed {
                    vertex: i,
                    detail: "no informative patch".into(),
                })
        })
        .collect()
}

/// Conv model outputting `sqrt(k) e_bin(patch)` regardless of patch location.
pub fn construct_example4_optimal(
    spec: &Example4Spec,
    graph: &PositivePairGraph,
    k: usize,
) -> Result<Construction> {
    spec.validate()?;
    let s = spec.s;
    if k != 1 << s {
        return Err(Error::SpecMismatch(format!("construction needs k = 2^s = {}, got {k}", 1 << s)));
    }
    let sk = (k as f64).sqrt();
    let scale = sk / (spec.gamma - 1.0);
    let u = DMatrix::from_fn(k, s, |i, j| scale * sign_pattern(i, s)[j]);
    let patterns: Vec<usize> = example4_patches(spec, graph)?.into_iter().map(|p| p.1).collect();
    let expected = pattern_onehots(&patterns, k);

    let s_f = s as f64;
    let displayed = vec![scale * (-s_f - (spec.gamma - 1.0) * (s_f - 1.0)); k];
    let model = RepresentationModel::conv(&u, &displayed, spec.d)?;
    if verify_outputs(&model, graph, &expected, VERIFY_TOL).is_ok() {
        return Ok(Construction {
            model,
            bias: BiasSource::Displayed,
        });
    }
    log::info!("displayed conv bias failed verification; solving per unit");
    let x = graph.coordinate_matrix();
    let pre = DMatrix::from_fn(graph.n(), k, |i, c| {
        let xi: Vec<f64> = x.row(i).iter().copied().collect();
        let uc: Vec<f64> = u.row(c).iter().copied().collect();
        (0..spec.d)
            .map(|t| conv_pre(&uc, 0.0, &xi, t))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let solved = solve_bias(&pre, &patterns, sk);
    let model = RepresentationModel::conv(&u, &solved, spec.d)?;
    verify_outputs(&model, graph, &expected, VERIFY_TOL)?;
    Ok(Construction {
        model,
        bias: BiasSource::Solved,
    })
}

/// Tabular model with `f(x)_j = sqrt(k)` when the sign pattern of `key_dims`
/// is congruent to `j` modulo `k`, else 0.
///
/// With `k = 2^|key_dims|` every pattern has its own output. Smaller `k`
/// groups patterns; the loss stays zero when `k` divides `2^|key_dims|`.
pub fn construct_adversarial_universal(
    graph: &PositivePairGraph,
    k: usize,
    key_dims: &[usize],
) -> Result<RepresentationModel> {
    let max = 1usize.checked_shl(key_dims.len() as u32).unwrap_or(usize::MAX);
    if k == 0 || k > max {
        return Err(Error::TooManyOutputs { requested: k, max });
    }
    if let Some(&bad) = key_dims.iter().find(|&&j| j >= graph.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: graph.dim(),
        });
    }
    let mut patterns = Vec::with_capacity(graph.n());
    for (i, v) in graph.vertices().iter().enumerate() {
        let c = v.coords();
        if key_dims.iter().any(|&j| c[j] == 0.0) {
            return Err(Error::ConstructionVerificationFailed {
                vertex: i,
                detail: "key coordinate has no sign".into(),
            });
        }
        patterns.push(sign_pattern_index(key_dims.iter().map(|&j| c[j])) % k);
    }
    let values = pattern_onehots(&patterns, k);
    RepresentationModel::tabular(&values)
}

/// Tabular model `f(x) = e_{id(x)} / sqrt(P_{id(x)})`.
pub fn scaled_indicator_model(
    graph: &PositivePairGraph,
    partition: &Partition,
) -> Result<RepresentationModel> {
    if partition.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            context: "partition length",
            expected: graph.n(),
            found: partition.len(),
        });
    }
    let masses = partition.masses(graph);
    let a = partition.assignment();
    let values = DMatrix::from_fn(graph.n(), partition.m(), |i, c| {
        if a[i] == c {
            1.0 / masses[c].sqrt()
        } else {
            0.0
        }
    });
    RepresentationModel::tabular(&values)
}

/// ReLU model with `k` units, each indicating one (location, patch) cluster of
/// the Example 4 graph at scale `1/sqrt(P_cluster)`; all other clusters map to 0.
///
/// Clusters are taken in order of location, then patch index.
pub fn construct_relu_adversarial_example4(
    spec: &Example4Spec,
    graph: &PositivePairGraph,
    k: usize,
) -> Result<RepresentationModel> {
    spec.validate()?;
    let (d, s) = (spec.d, spec.s);
    let clusters = d << s;
    if k == 0 || k > clusters {
        return Err(Error::TooManyOutputs {
            requested: k,
            max: clusters,
        });
    }
    let located = example4_patches(spec, graph)?;
    let cluster_of: Vec<usize> = located.iter().map(|&(t, h)| (t << s) + h).collect();
    let mut mass = vec![0.0; clusters];
    for (c, m) in cluster_of.iter().zip(graph.marginal()) {
        mass[*c] += m;
    }
    let g = spec.gamma;
    let mut u = DMatrix::zeros(k, d);
    let mut b = vec![0.0; k];
    for unit in 0..k {
        let (t, h) = (unit >> s, unit & ((1 << s) - 1));
        if mass[unit] <= 0.0 {
            return Err(Error::SpecMismatch(format!("cluster {unit} has no mass")));
        }
        let c = 1.0 / (mass[unit].sqrt() * (g - 1.0));
        for (j, hj) in sign_pattern(h, s).into_iter().enumerate() {
            u[(unit, (t + j) % d)] = c * hj;
        }
        b[unit] = -c * (g * (s as f64 - 1.0) + 1.0);
    }
    let model = RepresentationModel::relu(&u, &b)?;
    let expected = DMatrix::from_fn(graph.n(), k, |i, unit| {
        if cluster_of[i] == unit {
            1.0 / mass[unit].sqrt()
        } else {
            0.0
        }
    });
    verify_outputs(&model, graph, &expected, 1e-10)?;
    Ok(model)
}
