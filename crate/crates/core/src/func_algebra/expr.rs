use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Relative pole threshold: a quotient is treated as a pole when
/// `|den| < POLE_THRESHOLD * (1 + |num|)`.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Result of evaluating a meromorphic function: a finite value or the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Finite(Complex64),
    Infinity,
}

impl Value {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Value::Finite(c) => Some(c),
            Value::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Value::Infinity)
    }
}

/// Node of an expression tree. Build nodes through the constructors on
/// [`Expr`], which fold constants and collect polynomial parts.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Constant(Complex64),
    Variable,
    Poly(Polynomial),
    /// `exp(p(z))`.
    Exp(Polynomial),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    IntegerPower(Expr, u32),
    Quotient(Expr, Expr),
    /// `D[operand, order]`; `result` holds the materialized derivative.
    Derivative {
        operand: Expr,
        order: u32,
        result: Expr,
    },
}

/// Immutable, cheaply cloneable expression for a function in the closure of
/// rational functions and `exp(polynomial)` under `+`, `*`, integer powers,
/// quotients and derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_node(Node::Constant(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::zero())
    }

    pub fn one() -> Self {
        Self::constant(Complex64::one())
    }

    pub fn var() -> Self {
        Self::from_node(Node::Variable)
    }

    /// Polynomial node; degenerates to a constant or the bare variable when possible.
    pub fn poly(p: Polynomial) -> Self {
        if p.is_constant() {
            Self::constant(p.coeff(0))
        } else if p == Polynomial::identity() {
            Self::var()
        } else {
            Self::from_node(Node::Poly(p))
        }
    }

    pub fn exp(p: Polynomial) -> Self {
        if p.is_constant() {
            Self::constant(p.coeff(0).exp())
        } else {
            Self::from_node(Node::Exp(p))
        }
    }

    /// Polynomial view of this node, if it is a constant, `z`, or a polynomial.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        match self.node() {
            Node::Constant(c) => Some(Polynomial::constant(*c)),
            Node::Variable => Some(Polynomial::identity()),
            Node::Poly(p) => Some(p.clone()),
            _ => None,
        }
    }

    /// Expands sums, products and powers of polynomial nodes into one polynomial.
    ///
    /// Powers of polynomials are kept factored inside expressions, since the
    /// expanded form loses accuracy near clustered roots.
    pub fn expand_polynomial(&self) -> Option<Polynomial> {
        match self.node() {
            Node::Sum(ts) => ts
                .iter()
                .try_fold(Polynomial::zero(), |acc, t| Some(&acc + &t.expand_polynomial()?)),
            Node::Product(fs) => fs
                .iter()
                .try_fold(Polynomial::one(), |acc, f| Some(&acc * &f.expand_polynomial()?)),
            Node::IntegerPower(b, e) => Some(b.expand_polynomial()?.pow(*e)),
            Node::Derivative { result, .. } => result.expand_polynomial(),
            _ => self.as_polynomial(),
        }
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self.node() {
            Node::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_zero())
    }

    fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        let mut poly = Polynomial::zero();
        let mut rest = Vec::new();
        let mut stack: Vec<Expr> = terms.into_iter().collect();
        stack.reverse();
        while let Some(t) = stack.pop() {
            if let Some(p) = t.as_polynomial() {
                poly = &poly + &p;
            } else if let Node::Sum(inner) = t.node() {
                stack.extend(inner.iter().rev().cloned());
            } else {
                rest.push(t);
            }
        }
        if !poly.is_zero() {
            rest.insert(0, Self::poly(poly));
        }
        match rest.len() {
            0 => Self::zero(),
            1 => rest.pop().unwrap(),
            _ => Self::from_node(Node::Sum(rest)),
        }
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Self {
        let mut poly = Polynomial::one();
        let mut rest = Vec::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        stack.reverse();
        while let Some(f) = stack.pop() {
            if let Some(p) = f.as_polynomial() {
                if p.is_zero() {
                    return Self::zero();
                }
                poly = &poly * &p;
            } else if let Node::Product(inner) = f.node() {
                stack.extend(inner.iter().rev().cloned());
            } else {
                rest.push(f);
            }
        }
        if poly != Polynomial::one() {
            rest.insert(0, Self::poly(poly));
        }
        match rest.len() {
            0 => Self::one(),
            1 => rest.pop().unwrap(),
            _ => Self::from_node(Node::Product(rest)),
        }
    }

    pub fn add(&self, other: &Expr) -> Self {
        Self::sum([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Self {
        Self::sum([self.clone(), other.neg()])
    }

    pub fn mul(&self, other: &Expr) -> Self {
        Self::product([self.clone(), other.clone()])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::product([Self::constant(c), self.clone()])
    }

    pub fn neg(&self) -> Self {
        self.scale(-Complex64::one())
    }

    pub fn pow(&self, exponent: u32) -> Self {
        match exponent {
            0 => return Self::one(),
            1 => return self.clone(),
            _ => {}
        }
        match self.node() {
            Node::Constant(c) => return Self::constant(c.powu(exponent)),
            Node::Variable => return Self::poly(Polynomial::monomial(Complex64::one(), exponent as usize)),
            Node::Poly(p) if p.coeffs().iter().filter(|c| !c.is_zero()).count() == 1 => {
                return Self::poly(p.pow(exponent));
            }
            _ => {}
        }
        if let Node::IntegerPower(base, e) = self.node() {
            return base.pow(e * exponent);
        }
        Self::from_node(Node::IntegerPower(self.clone(), exponent))
    }

    pub fn div(&self, other: &Expr) -> Self {
        if let Some(c) = other.as_constant() {
            if !c.is_zero() {
                return self.scale(c.inv());
            }
        }
        if self.is_zero() {
            return Self::zero();
        }
        if other.is_one() {
            return self.clone();
        }
        Self::from_node(Node::Quotient(self.clone(), other.clone()))
    }

    /// `1 / self`.
    pub fn recip(&self) -> Self {
        Self::one().div(self)
    }

    /// Derivative marker node: remembers the operand and order, and carries the
    /// symbolic result.
    pub fn derivative(operand: &Expr, order: u32) -> Self {
        if order == 0 {
            return operand.clone();
        }
        let result = operand.differentiate(order);
        Self::from_node(Node::Derivative {
            operand: operand.clone(),
            order,
            result,
        })
    }

    /// Symbolic `k`-th derivative.
    pub fn differentiate(&self, k: u32) -> Expr {
        (0..k).fold(self.clone(), |e, _| e.d())
    }

    fn d(&self) -> Expr {
        match self.node() {
            Node::Constant(_) => Self::zero(),
            Node::Variable => Self::one(),
            Node::Poly(p) => Self::poly(p.derivative()),
            Node::Exp(p) => Self::poly(p.derivative()).mul(self),
            Node::Sum(ts) => Self::sum(ts.iter().map(Expr::d)),
            Node::Product(fs) => Self::sum((0..fs.len()).map(|i| {
                Self::product(
                    fs.iter()
                        .enumerate()
                        .map(|(j, f)| if i == j { f.d() } else { f.clone() }),
                )
            })),
            Node::IntegerPower(b, e) => Self::product([
                Self::real(*e as f64),
                b.pow(e - 1),
                b.d(),
            ]),
            Node::Quotient(u, v) => {
                let num = u.d().mul(v).sub(&u.mul(&v.d()));
                num.div(&v.pow(2))
            }
            Node::Derivative { result, .. } => result.d(),
        }
    }

    /// Evaluates the expression at `z`.
    ///
    /// Poles yield [`Value::Infinity`]; `0/0`, `inf - inf`, `0 * inf` and
    /// `inf/inf` are reported as [`Error::Indeterminate`].
    pub fn eval(&self, z: Complex64) -> Result<Value> {
        use Value::{Finite, Infinity};
        let indeterminate = || Error::Indeterminate(z);
        Ok(match self.node() {
            Node::Constant(c) => Finite(*c),
            Node::Variable => Finite(z),
            Node::Poly(p) => Finite(p.eval(z)),
            Node::Exp(p) => Finite(p.eval(z).exp()),
            Node::Sum(ts) => {
                let mut acc = Complex64::zero();
                let mut infinite = 0;
                for t in ts {
                    match t.eval(z)? {
                        Finite(v) => acc += v,
                        Infinity => infinite += 1,
                    }
                }
                match infinite {
                    0 => Finite(acc),
                    1 => Infinity,
                    _ => return Err(indeterminate()),
                }
            }
            Node::Product(fs) => {
                let mut acc = Complex64::one();
                let mut infinite = false;
                let mut zero = false;
                for f in fs {
                    match f.eval(z)? {
                        Finite(v) if v.is_zero() => zero = true,
                        Finite(v) => acc *= v,
                        Infinity => infinite = true,
                    }
                }
                match (infinite, zero) {
                    (true, true) => return Err(indeterminate()),
                    (true, false) => Infinity,
                    (false, true) => Finite(Complex64::zero()),
                    (false, false) => Finite(acc),
                }
            }
            Node::IntegerPower(b, e) => match b.eval(z)? {
                Finite(v) => Finite(v.powu(*e)),
                Infinity => Infinity,
            },
            Node::Quotient(u, v) => match (u.eval(z)?, v.eval(z)?) {
                (Infinity, Infinity) => return Err(indeterminate()),
                (Infinity, Finite(_)) => Infinity,
                (Finite(_), Infinity) => Finite(Complex64::zero()),
                (Finite(n), Finite(d)) => {
                    if d.norm() < POLE_THRESHOLD * (1.0 + n.norm()) {
                        if n.norm() < POLE_THRESHOLD {
                            return Err(indeterminate());
                        }
                        Infinity
                    } else {
                        Finite(n / d)
                    }
                }
            },
            Node::Derivative { result, .. } => result.eval(z)?,
        })
    }

    /// The function `xi -> self(a*xi + b)`, as an expression in `xi`.
    ///
    /// Derivative markers are replaced by their materialized results, since the
    /// chain rule changes their meaning under substitution.
    pub fn substitute_affine(&self, a: Complex64, b: Complex64) -> Expr {
        match self.node() {
            Node::Constant(_) => self.clone(),
            Node::Variable => Self::poly(Polynomial::new(vec![b, a])),
            Node::Poly(p) => Self::poly(p.compose_affine(a, b)),
            Node::Exp(p) => Self::exp(p.compose_affine(a, b)),
            Node::Sum(ts) => Self::sum(ts.iter().map(|t| t.substitute_affine(a, b))),
            Node::Product(fs) => Self::product(fs.iter().map(|f| f.substitute_affine(a, b))),
            Node::IntegerPower(base, e) => base.substitute_affine(a, b).pow(*e),
            Node::Quotient(u, v) => u.substitute_affine(a, b).div(&v.substitute_affine(a, b)),
            Node::Derivative { result, .. } => result.substitute_affine(a, b),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Constant(_) | Node::Variable | Node::Poly(_) | Node::Exp(_) => 0,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().map(Expr::size).sum(),
            Node::IntegerPower(b, _) => b.size(),
            Node::Quotient(u, v) => u.size() + v.size(),
            Node::Derivative { operand, result, .. } => operand.size() + result.size(),
        }
    }
}

/// `evaluate(f, z)`.
pub fn evaluate(f: &Expr, z: Complex64) -> Result<Value> {
    f.eval(z)
}

/// `differentiate(f, k)` for `k >= 1`.
pub fn differentiate(f: &Expr, k: u32) -> Result<Expr> {
    if k == 0 {
        return Err(Error::Precondition("derivative order must be at least 1".into()));
    }
    Ok(f.differentiate(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn finite(v: Result<Value>) -> Complex64 {
        v.unwrap().finite().expect("finite value")
    }

    #[test]
    fn square_at_one_plus_i() {
        let f = Expr::var().pow(2);
        assert!((finite(f.eval(c(1.0, 1.0))) - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn reciprocal_pole() {
        let f = Expr::var().recip();
        assert_eq!(f.eval(c(0.0, 0.0)).unwrap(), Value::Infinity);
    }

    #[test]
    fn indeterminate_quotient() {
        let f = Expr::var().div(&Expr::var().pow(2));
        assert_eq!(f.eval(c(0.0, 0.0)), Err(Error::Indeterminate(c(0.0, 0.0))));
    }

    #[test]
    fn euler_identity() {
        let f = Expr::exp(Polynomial::identity());
        assert!((finite(f.eval(c(0.0, PI))) - c(-1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn second_derivative_of_cube() {
        let f = Expr::var().pow(3);
        let d2 = differentiate(&f, 2).unwrap();
        assert_eq!(d2.as_polynomial(), Some(Polynomial::from_real(&[0.0, 6.0])));
    }

    #[test]
    fn exponential_derivative() {
        let k = c(0.3, -1.2);
        let f = Expr::exp(Polynomial::monomial(k, 1));
        let df = f.differentiate(1);
        for z in [c(0.1, 0.2), c(-1.0, 0.5)] {
            let want = k * (k * z).exp();
            assert!((finite(df.eval(z)) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_order_derivative_rejected() {
        assert!(differentiate(&Expr::var(), 0).is_err());
    }

    #[test]
    fn affine_substitution() {
        let f = Expr::exp(Polynomial::identity()).div(&Expr::var());
        let g = f.substitute_affine(c(2.0, 0.0), c(1.0, 0.0));
        let xi = c(0.3, 0.7);
        let want = finite(f.eval(c(2.0, 0.0) * xi + 1.0));
        assert!((finite(g.eval(xi)) - want).norm() < 1e-14);
    }
}
