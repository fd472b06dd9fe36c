//! Canonical form `sum_i R_i(z) * exp(p_i(z))` with distinct exponent polynomials.
//!
//! Rational parts keep their denominator factored into linear factors
//! `(z - w)^e`, so that poles never have to be recovered from a product of
//! denominators. After every operation the numerator is deflated by any pole
//! factor it still contains; this keeps degrees minimal and makes the zero and
//! pole divisors directly available.

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::divisor::{Divisor, DivisorKind};
use super::expr::{Expr, Node, Value};
use super::polynomial::Polynomial;
use super::roots::{poly_roots, CLUSTER_RADIUS};
use crate::error::{Error, Result};

/// Leading numerator coefficients below this fraction of the largest one are rounding noise.
const NUMERATOR_TRIM: f64 = 1e-13;

/// A numerator counts as vanishing at a pole when `|n(w)| <= CANCEL_TOL * sum |c_k||w|^k`.
const CANCEL_TOL: f64 = 1e-9;

/// Exponent polynomials closer than this (relative) are treated as equal.
const EXPONENT_TOL: f64 = 1e-12;

/// Rational function `num(z) / prod (z - w)^e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rational {
    num: Polynomial,
    poles: Vec<(Complex64, u32)>,
}

fn find_pole(poles: &[(Complex64, u32)], w: Complex64) -> Option<usize> {
    poles.iter().position(|(p, _)| (*p - w).norm() <= CLUSTER_RADIUS)
}

fn pole_product(poles: &[(Complex64, u32)]) -> Polynomial {
    poles
        .iter()
        .fold(Polynomial::one(), |acc, &(w, e)| &acc * &Polynomial::linear_power(w, e))
}

impl Rational {
    pub fn constant(c: Complex64) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn from_poly(num: Polynomial) -> Self {
        Rational {
            num,
            poles: Vec::new(),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    /// Pole points with their orders.
    pub fn poles(&self) -> &[(Complex64, u32)] {
        &self.poles
    }

    pub fn denominator(&self) -> Polynomial {
        pole_product(&self.poles)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalized(mut self) -> Self {
        self.num = self.num.trimmed(NUMERATOR_TRIM);
        if self.num.is_zero() {
            self.poles.clear();
            return self;
        }
        for (w, e) in self.poles.iter_mut() {
            while *e > 0 {
                let (q, rem) = self.num.div_linear(*w);
                if rem.norm() > CANCEL_TOL * self.num.eval_abs(*w) {
                    break;
                }
                self.num = q;
                *e -= 1;
            }
        }
        self.poles.retain(|&(_, e)| e > 0);
        self
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Rational {
            num: self.num.scale(s),
            poles: self.poles.clone(),
        }
        .normalized()
    }

    pub fn add(&self, other: &Rational) -> Self {
        let mut lcm = self.poles.clone();
        for &(w, e) in &other.poles {
            match find_pole(&lcm, w) {
                Some(i) => lcm[i].1 = lcm[i].1.max(e),
                None => lcm.push((w, e)),
            }
        }
        let lift = |r: &Rational| {
            let missing: Vec<(Complex64, u32)> = lcm
                .iter()
                .map(|&(w, e)| {
                    let have = find_pole(&r.poles, w).map_or(0, |i| r.poles[i].1);
                    (w, e - have)
                })
                .collect();
            &r.num * &pole_product(&missing)
        };
        Rational {
            num: &lift(self) + &lift(other),
            poles: lcm.clone(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &Rational) -> Self {
        let mut poles = self.poles.clone();
        for &(w, e) in &other.poles {
            match find_pole(&poles, w) {
                Some(i) => poles[i].1 += e,
                None => poles.push((w, e)),
            }
        }
        Rational {
            num: &self.num * &other.num,
            poles,
        }
        .normalized()
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut result = Rational::constant(Complex64::one());
        for _ in 0..exponent {
            result = result.mul(self);
        }
        result
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        let roots = poly_roots(&self.num)?;
        let num = pole_product(&self.poles).scale(self.num.leading().inv());
        Ok(Rational {
            num,
            poles: roots.iter().map(|r| (r.point, r.multiplicity)).collect(),
        }
        .normalized())
    }

    /// `(n / prod (z-w_i)^e_i)' = (n' prod(z-w_i) - n sum_i e_i prod_{k!=i}(z-w_k)) / prod (z-w_i)^(e_i+1)`.
    pub fn derivative(&self) -> Self {
        let simple: Vec<Polynomial> = self
            .poles
            .iter()
            .map(|&(w, _)| Polynomial::linear_power(w, 1))
            .collect();
        let all = simple.iter().fold(Polynomial::one(), |a, f| &a * f);
        let mut num = &self.num.derivative() * &all;
        for (i, &(_, e)) in self.poles.iter().enumerate() {
            let others = simple
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .fold(Polynomial::one(), |a, (_, f)| &a * f);
            num = &num - &(&self.num * &others).scale(Complex64::new(e as f64, 0.0));
        }
        Rational {
            num,
            poles: self.poles.iter().map(|&(w, e)| (w, e + 1)).collect(),
        }
        .normalized()
    }

    pub fn eval(&self, z: Complex64) -> Value {
        let mut den = Complex64::one();
        for &(w, e) in &self.poles {
            let d = z - w;
            if d.norm() <= f64::EPSILON * (1.0 + w.norm()) {
                return Value::Infinity;
            }
            den *= d.powu(e);
        }
        Value::Finite(self.num.eval(z) / den)
    }

    /// `log |R(z)|`, computed without forming the quotient.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        let mut acc = self.num.eval(z).norm().ln();
        for &(w, e) in &self.poles {
            acc -= f64::from(e) * (z - w).norm().ln();
        }
        acc
    }

    /// Roots of the numerator. Residual roots within the cluster radius of a
    /// pole cancel against it.
    pub fn divisors(&self) -> Result<(Divisor, Divisor)> {
        if self.num.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        let mut zeros = Divisor::empty(DivisorKind::Zeros);
        let mut poles = Divisor::from_entries(DivisorKind::Poles, self.poles.iter().copied());
        for root in poly_roots(&self.num)? {
            let pole_mult = poles.multiplicity_at(root.point);
            let cancel = pole_mult.min(root.multiplicity);
            if cancel > 0 {
                let rest: Vec<(Complex64, u32)> = poles
                    .entries()
                    .iter()
                    .map(|&(p, m)| {
                        if (p - root.point).norm() <= CLUSTER_RADIUS {
                            (p, m - cancel)
                        } else {
                            (p, m)
                        }
                    })
                    .collect();
                poles = Divisor::from_entries(DivisorKind::Poles, rest);
            }
            zeros.insert(root.point, root.multiplicity - cancel);
        }
        Ok((zeros, poles))
    }
}

/// One term `R(z) * exp(p(z))` with `p(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub rational: Rational,
    pub exponent: Polynomial,
}

impl ExpTerm {
    fn new(rational: Rational, exponent: Polynomial) -> Self {
        // exp(p(0)) is a constant factor; fold it into the rational part.
        let shift = exponent.coeff(0);
        let (rational, exponent) = if shift.is_zero() {
            (rational, exponent)
        } else {
            (
                rational.scale(shift.exp()),
                &exponent - &Polynomial::constant(shift),
            )
        };
        ExpTerm { rational, exponent }
    }

    pub fn eval(&self, z: Complex64) -> Value {
        match self.rational.eval(z) {
            Value::Finite(v) => Value::Finite(v * self.exponent.eval(z).exp()),
            Value::Infinity => Value::Infinity,
        }
    }

    /// `log |R(z) exp(p(z))|`, free of overflow in the exponential.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        self.rational.log_abs(z) + self.exponent.eval(z).re
    }
}

/// Sum of [`ExpTerm`]s with pairwise distinct exponents.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CanonicalForm {
    terms: Vec<ExpTerm>,
}

impl CanonicalForm {
    pub fn zero() -> Self {
        CanonicalForm { terms: Vec::new() }
    }

    pub fn from_term(rational: Rational, exponent: Polynomial) -> Self {
        Self::zero().plus_term(ExpTerm::new(rational, exponent))
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn plus_term(mut self, term: ExpTerm) -> Self {
        if term.rational.is_zero() {
            return self;
        }
        match self
            .terms
            .iter()
            .position(|t| t.exponent.approx_eq(&term.exponent, EXPONENT_TOL))
        {
            Some(i) => {
                let merged = self.terms[i].rational.add(&term.rational);
                if merged.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].rational = merged;
                }
            }
            None => self.terms.push(term),
        }
        self
    }

    pub fn add(&self, other: &CanonicalForm) -> Self {
        other
            .terms
            .iter()
            .cloned()
            .fold(self.clone(), CanonicalForm::plus_term)
    }

    pub fn mul(&self, other: &CanonicalForm) -> Self {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                out = out.plus_term(ExpTerm::new(
                    a.rational.mul(&b.rational),
                    &a.exponent + &b.exponent,
                ));
            }
        }
        out
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut result = Self::from_term(Rational::constant(Complex64::one()), Polynomial::zero());
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Reciprocal; only single-term forms can be inverted within the class.
    pub fn inverse(&self) -> Result<Self> {
        let term = self.single()?;
        Ok(Self::from_term(term.rational.inverse()?, -&term.exponent))
    }

    pub fn derivative(&self) -> Self {
        self.terms.iter().fold(Self::zero(), |acc, t| {
            let r = t
                .rational
                .derivative()
                .add(&t.rational.mul(&Rational::from_poly(t.exponent.derivative())));
            acc.plus_term(ExpTerm::new(r, t.exponent.clone()))
        })
    }

    /// The unique term of an `R(z) exp(p(z))` form.
    pub fn single(&self) -> Result<&ExpTerm> {
        match self.terms.as_slice() {
            [] => Err(Error::IdenticallyZero),
            [t] => Ok(t),
            ts => Err(Error::NotNormalizable(format!(
                "sum of {} terms with distinct exponential factors",
                ts.len()
            ))),
        }
    }

    pub fn eval(&self, z: Complex64) -> Value {
        let mut acc = Complex64::zero();
        for t in &self.terms {
            match t.eval(z) {
                Value::Finite(v) => acc += v,
                Value::Infinity => return Value::Infinity,
            }
        }
        Value::Finite(acc)
    }

    pub fn is_pole_free(&self) -> bool {
        self.terms.iter().all(|t| t.rational.poles.is_empty())
    }
}

/// Reduces `f` to its canonical form.
pub fn canonicalize(f: &Expr) -> Result<CanonicalForm> {
    Ok(match f.node() {
        Node::Constant(c) => CanonicalForm::from_term(Rational::constant(*c), Polynomial::zero()),
        Node::Variable => {
            CanonicalForm::from_term(Rational::from_poly(Polynomial::identity()), Polynomial::zero())
        }
        Node::Poly(p) => CanonicalForm::from_term(Rational::from_poly(p.clone()), Polynomial::zero()),
        Node::Exp(p) => CanonicalForm::from_term(Rational::constant(Complex64::one()), p.clone()),
        Node::Sum(ts) => ts
            .iter()
            .try_fold(CanonicalForm::zero(), |acc, t| Ok::<_, Error>(acc.add(&canonicalize(t)?)))?,
        Node::Product(fs) => fs.iter().try_fold(
            CanonicalForm::from_term(Rational::constant(Complex64::one()), Polynomial::zero()),
            |acc, t| Ok::<_, Error>(acc.mul(&canonicalize(t)?)),
        )?,
        Node::IntegerPower(b, e) => canonicalize(b)?.pow(*e),
        Node::Quotient(u, v) => {
            let den = canonicalize(v)?;
            let inv = den.inverse().map_err(|e| match e {
                Error::NotNormalizable(_) => Error::NotNormalizable(
                    "quotient by a sum of distinct exponential factors".into(),
                ),
                other => other,
            })?;
            canonicalize(u)?.mul(&inv)
        }
        Node::Derivative { result, .. } => canonicalize(result)?,
    })
}

/// Zero and pole divisors of `f = R(z) exp(p(z))`.
pub fn divisors(f: &Expr) -> Result<(Divisor, Divisor)> {
    canonicalize(f)?.single()?.rational.divisors()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_algebra::parse::parse_function;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn divisors_with_exponential_factor() {
        let f = parse_function("(z-1)^2/z*exp(3*z)").unwrap();
        let (zeros, poles) = divisors(&f).unwrap();
        assert_eq!(zeros.entries().len(), 1);
        assert_eq!(zeros.multiplicity_at(c(1.0, 0.0)), 2);
        assert_eq!(poles.entries(), &[(c(0.0, 0.0), 1)]);
    }

    #[test]
    fn exponential_has_no_divisors() {
        let f = parse_function("exp(2*z+1)").unwrap();
        let (zeros, poles) = divisors(&f).unwrap();
        assert!(zeros.is_empty() && poles.is_empty());
    }

    #[test]
    fn common_factor_cancels() {
        let f = parse_function("(z^2-1)/(z-1)").unwrap();
        let (zeros, poles) = divisors(&f).unwrap();
        assert_eq!(zeros.degree(), 1);
        assert_eq!(zeros.multiplicity_at(c(-1.0, 0.0)), 1);
        assert!(poles.is_empty());
    }

    #[test]
    fn mixed_exponentials_not_normalizable() {
        let f = parse_function("exp(z)-1").unwrap();
        assert!(matches!(divisors(&f), Err(Error::NotNormalizable(_))));
        let g = parse_function("1/(exp(z)+exp(2*z))").unwrap();
        assert!(matches!(canonicalize(&g), Err(Error::NotNormalizable(_))));
        // Still evaluatable.
        assert!(g.eval(c(0.1, 0.2)).is_ok());
    }

    #[test]
    fn exponentials_cancel_to_rational() {
        let f = parse_function("exp(z)*exp(-z)*z").unwrap();
        let cf = canonicalize(&f).unwrap();
        let t = cf.single().unwrap();
        assert!(t.exponent.is_zero());
        assert_eq!(t.rational.numerator(), &Polynomial::identity());
    }

    #[test]
    fn identically_zero() {
        let f = parse_function("z-z").unwrap();
        assert_eq!(divisors(&f), Err(Error::IdenticallyZero));
    }

    #[test]
    fn canonical_derivative_matches_tree_derivative() {
        let f = parse_function("(z^2+1)/(z-2)^2*exp(z^2-z)").unwrap();
        let d_canon = canonicalize(&f).unwrap().derivative();
        let d_tree = f.differentiate(1);
        for z in [c(0.3, 0.1), c(-1.2, 0.8), c(3.0, -0.5)] {
            let a = d_canon.eval(z).finite().unwrap();
            let b = d_tree.eval(z).unwrap().finite().unwrap();
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn log_abs_matches_direct() {
        let f = parse_function("(z-3)/(z+1)^2*exp(2*z)").unwrap();
        let cf = canonicalize(&f).unwrap();
        let z = c(1.5, -2.0);
        let direct = f.eval(z).unwrap().finite().unwrap().norm().ln();
        assert!((cf.single().unwrap().log_abs(z) - direct).abs() < 1e-12);
    }
}
