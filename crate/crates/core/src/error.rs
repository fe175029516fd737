use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the differentiation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function} is not defined at {args:?}")]
    Domain { function: String, args: Vec<f64> },

    #[error("division by a value with zero primal part")]
    DivisionByZero,

    #[error("{what}: expected length {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("jet shapes differ")]
    ShapeMismatch,

    #[error("jet bases differ")]
    BasisMismatch,

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid jet shape: {0}")]
    InvalidShape(String),

    #[error("{function} has no derivative rule of order {order}")]
    UnsupportedOrder { function: String, order: usize },

    #[error("{function} cannot be lifted to {algebra}")]
    Unsupported {
        function: String,
        algebra: &'static str,
    },

    #[error("state space of dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("wrong seed kind: {0}")]
    Seed(&'static str),

    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),

    #[error("at {path}: {source}")]
    AtNode { path: String, source: Box<Error> },
}

impl Error {
    /// Strips any node-path context and returns the underlying error.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// True for errors caused by evaluating outside a function's domain.
    pub fn is_domain(&self) -> bool {
        matches!(
            self.root_cause(),
            Error::Domain { .. } | Error::DivisionByZero
        )
    }
}
