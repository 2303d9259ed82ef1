use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point id {id} out of range (n = {n})")]
    OutOfRange { id: usize, n: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate point: rows {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("triangle inequality violated: d({a},{c}) > d({a},{b}) + d({b},{c})")]
    TriangleViolation { a: usize, b: usize, c: usize },
    #[error("distance matrix not symmetric at ({i},{j})")]
    SymmetryViolation { i: usize, j: usize },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("input graph is disconnected")]
    DisconnectedInput,
    #[error("not a spanning tree: {0}")]
    NotATree(String),
    #[error("{what}: n = {n} exceeds cap {cap}")]
    SizeLimitExceeded { what: &'static str, n: usize, cap: usize },
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),
    #[error("bag {bag} at level {level} would be adopted by its own F-parent")]
    AdoptionByParent { level: usize, bag: usize },
    #[error("bag {bag} at level {level} would be both zombie and incubator")]
    LabelConflict { level: usize, bag: usize },
    #[error("non-empty bag {bag} at level {level} has an empty kernel")]
    EmptyKernel { level: usize, bag: usize },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
