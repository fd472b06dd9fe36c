//! Nevanlinna-theory laboratory for concrete meromorphic functions.
//!
//! Functions are expressions in `z` built from rational functions and
//! `exp(polynomial)`. Whenever such a function reduces to a single term
//! `R(z) e^{p(z)}`, its zeros and poles are known exactly and the
//! Nevanlinna functionals `N`, `m`, `T` can be evaluated on circles.
//!
//! ```
//! use nevanlab::func_algebra::parse_function;
//! use nevanlab::nevanlinna::characteristic_t;
//!
//! let f = parse_function("exp(z)").unwrap();
//! let t = characteristic_t(&f, 10.0, 4096).unwrap();
//! assert!((t - 10.0 / std::f64::consts::PI).abs() < 1e-5);
//! ```
//!
//! Modules:
//!
//! * [`func_algebra`]: expressions, parsing, differentiation, canonical forms, divisors.
//! * [`nevanlinna`]: counting, proximity and characteristic functions, spherical derivative.
//! * [`diff_poly`]: differential polynomials and the Leibniz expansion of `(g^n)^(t)`.
//! * [`inequality_lab`]: slack curves for the classical inequalities and their generalizations.
//! * [`normality`]: criterion checkers, Marty probe, Zalcman rescaling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diff_poly;
pub mod error;
pub mod func_algebra;
pub mod inequality_lab;
pub mod nevanlinna;
pub mod normality;

pub use error::{Error, Result};
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/nevanlinna.md")]
    mod nevanlinna {}
    #[doc = include_str!("../../../book/src/diff_poly.md")]
    mod diff_poly {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    mod inequalities {}
    #[doc = include_str!("../../../book/src/normality.md")]
    mod normality {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
