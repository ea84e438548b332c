use thiserror::Error;

/// Errors raised by the algebra, dynamics, optimization and gauge layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("algebra mismatch: {left:?} vs {right:?}")]
    AlgebraMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("element is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),

    #[error("element is not positive (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unitary for block {block} is not unitary (deviation {deviation:e})")]
    NotUnitary { block: usize, deviation: f64 },

    #[error("invalid block permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("generator index {index} out of range (group has {count} generators)")]
    UnknownGenerator { index: usize, count: usize },

    #[error("lattice generators {first} and {second} do not commute (residual {residual:e})")]
    NonCommuting {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("action does not respect the group table (residual {0:e})")]
    TableViolation(f64),

    #[error("empty Følner set")]
    EmptyFolnerSet,

    #[error("explicit Følner schedule exhausted: requested k = {requested}, schedule has {available} sets")]
    ScheduleExhausted { requested: usize, available: usize },

    #[error("schedule incompatible with group: {0}")]
    IncompatibleSchedule(String),

    #[error("unsupported for this group: {0}")]
    UnsupportedGroup(String),

    #[error("infeasible convex body: {0}")]
    Infeasible(String),

    #[error("malformed convex body: {0}")]
    MalformedBody(String),

    #[error("block set {0:?} is not invariant under the block permutations")]
    BlockSetNotInvariant(Vec<usize>),

    #[error("fixed-point algebra is not abelian (commutator residual {0:e})")]
    NonAbelianFixedAlgebra(f64),

    #[error("state is not an extreme invariant state (closest distance {0:e})")]
    NotExtreme(f64),

    #[error("equivariance violated (residual {0:e})")]
    EquivarianceViolation(f64),

    #[error("state is not invariant (residual {0:e})")]
    NotInvariant(f64),

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("consistency assertion failed: {0}")]
    Falsified(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
