use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unsupported construct: {0}")]
    Unsupported(String),

    #[error("indeterminate point at z = {0}")]
    Indeterminate(Complex64),

    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("the zero polynomial has no well-defined roots")]
    ZeroPolynomial,

    #[error("not normalizable to R(z)*exp(p(z)): {0}")]
    NotNormalizable(String),

    #[error("function is identically zero")]
    IdenticallyZero,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("alpha violation in extra term {index}: alpha_I = {extra} is not below alpha = {main}")]
    AlphaViolation {
        index: usize,
        extra: String,
        main: String,
    },

    #[error("expansion would produce more than {limit} terms; use smaller parameters")]
    TermOverflow { limit: usize },

    #[error("integer coefficient overflow while expanding")]
    CoefficientOverflow,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rescaled point leaves the domain at xi = {0}")]
    DomainEscape(Complex64),

    #[error("every grid point of instantiation {index} is a pole or indeterminate")]
    PoleDense { index: usize },
}
