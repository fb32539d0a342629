use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix data length {found} does not match {rows}x{cols}")]
    InvalidData { rows: usize, cols: usize, found: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("tolerance must be finite and nonnegative")]
    InvalidTolerance,

    #[error("basis[0] is not the identity matrix")]
    MissingUnit,
    #[error("basis is linearly dependent (min Gram eigenvalue {min_gram_eigenvalue:e})")]
    DependentBasis { min_gram_eigenvalue: f64 },
    #[error("adjoint of basis element {index} leaves the span (residual {residual:e})")]
    NotAdjointClosed { index: usize, residual: f64 },
    #[error("element is not in the operator system (residual {residual:e})")]
    NotInSystem { residual: f64 },
    #[error("matrix level must be at least 1")]
    ZeroLevel,
    #[error("ladder must not be empty")]
    EmptyLadder,
    #[error("ladder entries must be finite, positive and strictly descending")]
    InvalidLadder,

    #[error("map domain is not a full matrix algebra")]
    DomainNotFullAlgebra,
    #[error("map is not injective on coordinates")]
    NotInjective,
    #[error("image of basis element {index} is not in the codomain")]
    ImageNotInCodomain { index: usize },
    #[error("map does not commute with the adjoint on basis element {index}")]
    NotAdjointCompatible { index: usize },
    #[error("map codomain does not match the next domain")]
    CompositionMismatch,

    #[error("tensor element is not in the span of the factor systems (residual {residual:e})")]
    NotInSpan { residual: f64 },
    #[error("{side} factor is not positive in its system")]
    NotPositiveFactor { side: &'static str },
    #[error("element is not min-positive, no max certificate can exist")]
    NecessaryConditionFailed,

    #[error("stage {requested} is beyond the materialized depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("stage {requested} precedes the element stage {stage}")]
    StageOrder { requested: usize, stage: usize },
    #[error("elements live at different matrix levels ({left} vs {right})")]
    LevelMismatch { left: usize, right: usize },
    #[error("connecting map at stage {stage} is not unital")]
    NonUnitalConnection { stage: usize },
    #[error("connecting map at stage {stage} is not completely positive")]
    NonCpConnection { stage: usize },
    #[error("family fails the commuting triangle at stage {stage}, basis element {basis_index}")]
    IncompatibleFamily { stage: usize, basis_index: usize },
    #[error("family fails the commuting square at stage {stage}, basis element {basis_index}")]
    IncompatibleSquare { stage: usize, basis_index: usize },
    #[error("sequence is not an inclusion sequence")]
    NotInclusionSequence,
    #[error("matrix size {size} exceeds the cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },
    #[error("invalid gamma rule: {0}")]
    InvalidGamma(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
