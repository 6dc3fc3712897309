use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("the polyhedron is empty")]
    EmptyPolyhedron,
    #[error("desk-scale limit exceeded: {0}")]
    ScaleLimit(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("point does not lie in the feasible region")]
    NotInF,
    #[error("direction does not lie in the recession cone")]
    NotInRecessionCone,
    #[error("lifted point is infeasible for the relaxation")]
    InfeasiblePoint,
    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),
    #[error("the region is bounded; an unbounded relaxation needs a nonzero recession direction")]
    BoundedRegion,
    #[error("the region has vertices")]
    HasVertices,
    #[error("face index {index} out of range ({count} minimal faces)")]
    BadFaceIndex { index: usize, count: usize },
    #[error("point is not a vertex of the region")]
    NotAVertex,
    #[error("the two vertices coincide")]
    IdenticalVertices,
    #[error("the global oracle could not settle boundedness: {0}")]
    OracleIncomplete(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("parse error at line {line} ({field}): {msg}")]
    Parse {
        line: usize,
        field: String,
        msg: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
