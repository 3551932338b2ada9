use thiserror::Error;

/// Crate-wide error type. Verdicts (failed axioms, counterexamples) are data,
/// not errors; this type covers misuse and resource guards only.
#[derive(Debug, Error)]
pub enum CoarseError {
    #[error("point table size mismatch: {0} vs {1}")]
    TableMismatch(usize, usize),
    #[error("point index {0} out of range (table has {1} points)")]
    PointOutOfRange(usize, usize),
    #[error("distance table is not symmetric at ({0},{1})")]
    AsymmetricMetric(usize, usize),
    #[error("distance table has nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality fails at ({0},{1},{2})")]
    TriangleViolation(usize, usize, usize),
    #[error("scales must start at 0 and strictly increase")]
    BadScales,
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("assignment is not total: point {0} has no image")]
    NonTotalAssignment(usize),
    #[error("maps are not composable: {0}")]
    NotComposable(String),
    #[error("generator {0} is not a bijection of the point table")]
    NotBijective(String),
    #[error("declared relation {0} does not hold on the window")]
    RelationFails(String),
    #[error("equivariant request on a non-isocoarse action (fails at level {0})")]
    NotIsocoarse(usize),
    #[error("equivariant request on a non-proper action")]
    NotProper,
    #[error("collar width {0} exceeds chain depth {1}")]
    CollarTooWide(usize, usize),
    #[error("grid needs at least two ticks")]
    GridTooSmall,
    #[error("neighborhood family invalid: {0}")]
    BadNeighborhoods(String),
    #[error("profile out of window range at point {0}")]
    ProfileOutOfRange(usize),
    #[error("profile violates its declared bound at point {0}")]
    ProfileBoundViolated(usize),
    #[error("homotopy data invalid: {0}")]
    BadHomotopy(String),
    #[error("horizon insufficient: trajectory of point {0} escapes the window at step {1}")]
    HorizonInsufficient(usize, usize),
    #[error("controlledness witness missing for source level {0}")]
    WitnessMissing(usize),
    #[error("excisiveness witness absent (fails at level {0})")]
    NotExcisive(usize),
    #[error("modulus {0} must be prime")]
    NotPrime(u64),
    #[error("coefficient action matrix for {0} is not invertible over the ring")]
    BadCoefficientAction(String),
    #[error("degree {0} outside assembled range 0..={1}")]
    DegreeOutOfRange(usize, usize),
    #[error("map does not commute with the boundary at degree {0}")]
    NotChainMap(usize),
    #[error("composite of consecutive maps is nonzero at degree {0}")]
    CompositeNonzero(usize),
    #[error("excision matrix not invertible at degree {0}")]
    ExcisionNotInvertible(usize),
    #[error("linear system has no solution over the ring")]
    NoSolution,
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoarseError>;
