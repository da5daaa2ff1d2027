use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("relay {0} is not reachable from any macro base station")]
    UnreachableRelay(usize),
    #[error("unknown stream ({link}, {stream})")]
    UnknownStream { link: usize, stream: usize },
    #[error("network has no relay")]
    NoRelay,
    #[error("network is not MAX shaped: {0}")]
    NotMaxShaped(String),
    #[error("network is not uniform orthogonal: {0}")]
    NotUniformOrthogonal(String),
    #[error("parallel arcs do not have uniform multiplicity {0}")]
    NonUniformMultiplicity(usize),
    #[error("{algo} does not support model {flags}")]
    ModelMismatch { algo: &'static str, flags: String },
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("instance too large for enumeration: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
    #[error("nothing to color")]
    EmptyColoring,
    #[error("missing vertex positions")]
    MissingGeometry,
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
