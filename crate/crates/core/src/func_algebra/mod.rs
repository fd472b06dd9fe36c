//! Symbolic meromorphic functions: the closure of rational functions and
//! `exp(polynomial)` under `+`, `*`, integer powers, quotients and derivatives.
//!
//! Functions in the class reduce to `sum_i R_i(z) exp(p_i(z))`. When a single
//! exponential factor survives, zeros and poles come from the rational part
//! alone and are computed exactly up to root-finder accuracy.

mod canonical;
mod divisor;
mod expr;
mod parse;
mod polynomial;
mod roots;

pub use canonical::{canonicalize, divisors, CanonicalForm, ExpTerm, Rational};
pub use divisor::{Divisor, DivisorKind};
pub use expr::{differentiate, evaluate, Expr, Node, Value, POLE_THRESHOLD};
pub use parse::{complex_literal, parse_complex, parse_function, parse_with_params};
pub use polynomial::Polynomial;
pub use roots::{poly_roots, Root, CLUSTER_RADIUS};
