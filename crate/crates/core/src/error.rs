use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    // graph construction and queries
    #[error("joint matrix is not symmetric at ({i}, {j}): {forward} vs {backward}")]
    AsymmetricJoint {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    #[error("probability mass sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("vertex {index} has zero marginal mass")]
    ZeroMassVertex { index: usize },
    #[error("vertices {first} and {second} have identical coordinates")]
    DuplicateVertex { first: usize, second: usize },
    #[error("invalid entry {value} at ({i}, {j})")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("non-finite coordinate in vertex {index}")]
    NonFiniteCoordinate { index: usize },
    #[error("augmentation kernel of natural datum {natural} sums to {sum}, expected 1")]
    KernelNotNormalized { natural: usize, sum: f64 },
    #[error("empty support")]
    EmptySupport,
    #[error("empty vertex subset")]
    EmptySubset,
    #[error("vertex subset carries zero conditional positive-pair mass")]
    ZeroConditionalMass,
    #[error("index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    // spectral
    #[error("function is defined on a different graph")]
    GraphMismatch,
    #[error("eigensolver failure: {0}")]
    EigSolverFailure(String),
    #[error("covariance of the restricted data is degenerate")]
    DegenerateCovariance,
    #[error("function has zero norm")]
    ZeroFunction,

    // generators
    #[error("generator would produce {vertices} vertices, above the guard of {guard}")]
    SizeGuardExceeded { vertices: usize, guard: usize },
    #[error("label map has no class for sign pattern {pattern}")]
    IncompleteLabelMap { pattern: usize },
    #[error(
        "geometry violation: points {a:?} and {b:?} are {distance} apart, {kind} limit is {limit}"
    )]
    GeometryViolation {
        a: (usize, usize),
        b: (usize, usize),
        distance: f64,
        limit: f64,
        kind: &'static str,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    // function classes
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("construction verification failed at vertex {vertex}: {detail}")]
    ConstructionVerificationFailed { vertex: usize, detail: String },
    #[error("{requested} outputs requested, at most {max} supported")]
    TooManyOutputs { requested: usize, max: usize },

    // objective
    #[error("empty pair sample")]
    EmptySample,
    #[error("training diverged at iteration {iter} (loss {loss})")]
    Divergence { iter: usize, loss: f64 },
    #[error("non-finite gradient at iteration {iter}")]
    NonFiniteGradient { iter: usize },
    #[error("covariance is singular (smallest eigenvalue {min_eigenvalue})")]
    SingularCovariance { min_eigenvalue: f64 },

    // probe
    #[error("representations are not orthonormal (max deviation {deviation})")]
    NotOrthonormal { deviation: f64 },
    #[error("beta must be positive")]
    BetaZero,
    #[error("alpha {alpha} is not below P_min {p_min}")]
    AlphaExceedsPmin { alpha: f64, p_min: f64 },

    // separability
    #[error("every grid point failed for r = {r}")]
    AllGridPointsFailed { r: usize },

    // io
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
