use thiserror::Error;

/// Errors raised by the algebra, transform, enumeration and ensemble layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("n = {n} exceeds the monomial bit-set capacity of {max}")]
    TooManyVariables { n: usize, max: usize },

    #[error("variable count mismatch: {left} vs {right}")]
    VariableMismatch { left: usize, right: usize },

    #[error("assignment length {got} does not match n = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power {0} rejected; exponents start at 1")]
    ZeroPower(u32),

    #[error("symbolic expansion projects {projected} terms, budget is {budget}")]
    TermBudgetExceeded { projected: u128, budget: usize },

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("non-finite value while evaluating: {0}")]
    NonFinite(String),

    #[error("spectral gap ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("landscape is constant; no excited level exists")]
    ConstantLandscape,

    #[error("no inequality constraint recorded on this problem")]
    NoConstraint,

    #[error("instance {index}: {source}")]
    Instance {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse failure classes, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Capacity,
    Degenerate,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::TooManyVariables { .. }
            | Error::TermBudgetExceeded { .. }
            | Error::EnumerationCap { .. } => ErrorClass::Capacity,
            Error::UndefinedRatio(_) | Error::ConstantLandscape | Error::NonFinite(_) => {
                ErrorClass::Degenerate
            }
            Error::Instance { source, .. } => source.class(),
            _ => ErrorClass::Config,
        }
    }

    pub(crate) fn at_instance(self, index: usize) -> Error {
        Error::Instance {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
