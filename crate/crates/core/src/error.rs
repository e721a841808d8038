use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("{line}:{col}: undeclared identifier `{name}`")]
    Undeclared { line: usize, col: usize, name: String },

    #[error("{line}:{col}: exponents must be integer literals")]
    NonIntegerExponent { line: usize, col: usize },

    #[error("{line}:{col}: `{name}` is not a dependent variable (jets exist only for u and v)")]
    JetOnNonDependent { line: usize, col: usize, name: String },

    #[error("duplicate declaration of `{0}`")]
    DuplicateDeclaration(String),

    #[error("jet order {order} exceeds the order cap {cap}")]
    OrderCap { order: u32, cap: u8 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("`{0}` is not a single monomial and cannot be inverted")]
    NonMonomialInverse(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid equation: {0}")]
    InvalidEquation(String),

    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),

    #[error("cannot collect coefficients: {0}")]
    Collect(String),

    #[error("no {kind} named `{name}`")]
    Missing { kind: &'static str, name: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
}

impl Error {
    /// Inputs that are well formed but outside what the engine handles
    /// (mixed-derivative Lagrangians, the jet order cap, sums under `ln`).
    pub fn is_unsupported(&self) -> bool {
        matches!(self, Error::OrderCap { .. } | Error::Unsupported(_) | Error::NonMonomialInverse(_))
    }
}
