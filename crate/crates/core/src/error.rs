use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group orders must be positive, got {0:?}")]
    InvalidOrders(Vec<usize>),

    #[error("group of order {order} exceeds the supported maximum of {max}")]
    GroupTooLarge { order: usize, max: usize },

    #[error("element has {found} coordinates, group has rank {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("coordinate {value} at position {position} is outside 0..{order}")]
    CoordinateOutOfRange {
        position: usize,
        value: usize,
        order: usize,
    },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("objects belong to different groups")]
    GroupMismatch,

    #[error("inconsistent sections: {0}")]
    InconsistentSections(String),

    #[error("operator is not modulation preserving: defect {defect:e} exceeds {threshold:e}")]
    NotPreserving { defect: f64, threshold: f64 },

    #[error("range operator ill-defined on fiber {fiber}: residual {residual:e} exceeds {tol:e}")]
    WellDefinedness { fiber: usize, residual: f64, tol: f64 },

    #[error("range operator domain differs from the range function on fiber {fiber} (distance {distance:e})")]
    DomainMismatch { fiber: usize, distance: f64 },

    #[error("range operator does not map J(x) into J(x) on fiber {fiber} (defect {defect:e})")]
    DomainNotInvariant { fiber: usize, defect: f64 },

    #[error("fiber {fiber} has Gram rank {rank} but {generators} generators; not a Riesz system")]
    RieszRank {
        fiber: usize,
        rank: usize,
        generators: usize,
    },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
