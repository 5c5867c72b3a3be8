use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("class is not integral: {0}")]
    NotIntegral(String),

    #[error("vectors are proportional")]
    Proportional,

    #[error("charge {0} lies outside the upper half-plane union the negative real axis")]
    InvalidPhase(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("enumeration budget of {budget} lattice points exceeded at bound {bound}")]
    BudgetExceeded { budget: u64, bound: String },

    #[error("unknown object id `{0}`")]
    UnknownObject(String),

    #[error("object `{0}` is not semistable")]
    NotSemistable(String),

    #[error("inconsistent presentation: {0}")]
    InconsistentPresentation(String),

    #[error("empty moduli space: v^2 = {0} < -2")]
    EmptyModuli(String),

    #[error("vector is not primitive (content {0})")]
    NotPrimitive(String),
}

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    /// True for errors caused by malformed or out-of-contract input, as
    /// opposed to failures of an otherwise valid computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidLattice(_)
                | Error::InvalidInput(_)
                | Error::UnknownObject(_)
        )
    }
}
