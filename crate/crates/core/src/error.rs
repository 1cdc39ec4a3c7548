use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex index {index} out of range in {context}")]
    VertexOutOfRange { index: usize, context: String },

    #[error("inverted triangle at index {index} (signed area {area:e})")]
    InvertedTriangle { index: usize, area: f64 },

    #[error("edge ({a}, {b}) is shared by more than two triangles")]
    NonManifoldEdge { a: usize, b: usize },

    #[error("boundary edge ({a}, {b}) carries no tag")]
    UntaggedBoundaryEdge { a: usize, b: usize },

    #[error("tagged edge ({a}, {b}) is not a boundary edge")]
    TaggedInteriorEdge { a: usize, b: usize },

    #[error("boundary edge ({a}, {b}) is tagged more than once")]
    DuplicateBoundaryEdge { a: usize, b: usize },

    #[error("boundary is not closed at vertex {vertex}")]
    OpenBoundary { vertex: usize },

    #[error("unknown boundary tag `{0}`")]
    UnknownTag(String),

    #[error("no quadrature rule of degree {0} (supported: 0..=6)")]
    UnsupportedQuadrature(usize),

    #[error("Poisson ratio {0} is outside [0, 0.5)")]
    PoissonRatio(f64),

    #[error("permeability tensor is not symmetric positive definite")]
    PermeabilityNotPositiveDefinite,

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("iterative solver did not converge in {} iterations (final residual {:e})", residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    SolverDiverged { residuals: Vec<f64> },

    #[error("mesh sizes must halve successively (pair {index} has ratio {ratio})")]
    NonHalvingSequence { index: usize, ratio: f64 },

    #[error("time {0} is not present in the trajectory")]
    MissingTime(f64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
