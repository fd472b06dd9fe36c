//! Differential polynomials `P = sum_i c_i prod_j (g^(j))^{S_ij}` in one generator `g`.
//!
//! The monomials `g^n (g^{n_1})^{(t_1)} ... (g^{n_k})^{(t_k)}` are expanded by
//! differentiating `g^{n_j}` symbolically `t_j` times on the basis of
//! monomials `g^{m_0} (g')^{m_1} ... (g^{(t)})^{m_t}`, merging equal
//! multi-indices. Coefficients stay exact integers. Every emitted index
//! satisfies `sum m_j = n_j` and `sum j m_j = t_j`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func_algebra::{Expr, Value};

/// Upper bound on the number of terms a single expansion may produce.
pub const MAX_TERMS: usize = 1_000_000;

/// Exponents `(m_0, m_1, ..., m_t)` of `g, g', ..., g^(t)`; trailing zeros are dropped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        MultiIndex(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, order: usize) -> u32 {
        self.0.get(order).copied().unwrap_or(0)
    }

    /// `sum_j m_j`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `sum_j j m_j`.
    pub fn weight(&self) -> u32 {
        self.0.iter().enumerate().map(|(j, &m)| j as u32 * m).sum()
    }

    fn combine(&self, other: &MultiIndex) -> MultiIndex {
        let n = self.0.len().max(other.0.len());
        MultiIndex::new((0..n).map(|j| self.get(j) + other.get(j)).collect())
    }
}

/// `g^n (g^{n_1})^{(t_1)} ... (g^{n_k})^{(t_k)}` with `k >= 1`, `n_j >= 1`, `t_j >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct MonomialSpec {
    n: u32,
    pairs: Vec<(u32, u32)>,
}

#[derive(Deserialize)]
struct RawSpec {
    n: u32,
    pairs: Vec<(u32, u32)>,
}

impl TryFrom<RawSpec> for MonomialSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        MonomialSpec::new(raw.n, raw.pairs)
    }
}

impl MonomialSpec {
    pub fn new(n: u32, pairs: Vec<(u32, u32)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParams("a monomial needs at least one pair (n_j, t_j)".into()));
        }
        if let Some((j, &(nj, tj))) = pairs.iter().enumerate().find(|(_, &(nj, tj))| nj == 0 || tj == 0) {
            return Err(Error::InvalidParams(format!(
                "pair {} = ({nj}, {tj}): n_j >= 1 and t_j >= 1 are required",
                j + 1
            )));
        }
        Ok(MonomialSpec { n, pairs })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        raw.try_into()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// `n + sum n_j`.
    pub fn total_power(&self) -> u32 {
        self.n + self.pairs.iter().map(|p| p.0).sum::<u32>()
    }

    /// `sum t_j`.
    pub fn total_order(&self) -> u32 {
        self.pairs.iter().map(|p| p.1).sum()
    }

    /// The monomial itself, `g^n * D[g^{n_1}, t_1] * ...`, as an expression in `z`.
    pub fn compose(&self, g: &Expr) -> Expr {
        Expr::product(
            std::iter::once(g.pow(self.n)).chain(
                self.pairs
                    .iter()
                    .map(|&(nj, tj)| Expr::derivative(&g.pow(nj), tj)),
            ),
        )
    }
}

type TermMap = BTreeMap<MultiIndex, i128>;

fn differentiate_terms(terms: &TermMap) -> Result<TermMap> {
    let mut out = TermMap::new();
    for (idx, &c) in terms {
        for (j, &m) in idx.exponents().iter().enumerate() {
            if m == 0 {
                continue;
            }
            let mut exps = idx.exponents().to_vec();
            exps[j] -= 1;
            if exps.len() == j + 1 {
                exps.push(0);
            }
            exps[j + 1] += 1;
            let add = c.checked_mul(i128::from(m)).ok_or(Error::CoefficientOverflow)?;
            let slot = out.entry(MultiIndex::new(exps)).or_insert(0);
            *slot = slot.checked_add(add).ok_or(Error::CoefficientOverflow)?;
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

fn multiply_terms(a: &TermMap, b: &TermMap) -> Result<TermMap> {
    if a.len().saturating_mul(b.len()) > MAX_TERMS {
        return Err(Error::TermOverflow { limit: MAX_TERMS });
    }
    let mut out = TermMap::new();
    for (ia, &ca) in a {
        for (ib, &cb) in b {
            let c = ca.checked_mul(cb).ok_or(Error::CoefficientOverflow)?;
            let slot = out.entry(ia.combine(ib)).or_insert(0);
            *slot = slot.checked_add(c).ok_or(Error::CoefficientOverflow)?;
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

fn power_terms(n: u32) -> TermMap {
    TermMap::from([(MultiIndex::new(vec![n]), 1)])
}

/// `(g^n)^{(t)} = sum c_m g^{m_0} (g')^{m_1} ... (g^{(t)})^{m_t}`.
pub fn expand_power_derivative(n: u32, t: u32) -> Result<Vec<(i128, MultiIndex)>> {
    if n == 0 {
        return Err(Error::InvalidParams("power n must be at least 1".into()));
    }
    let mut terms = power_terms(n);
    for _ in 0..t {
        terms = differentiate_terms(&terms)?;
        if terms.len() > MAX_TERMS {
            return Err(Error::TermOverflow { limit: MAX_TERMS });
        }
    }
    Ok(terms.into_iter().map(|(idx, c)| (c, idx)).collect())
}

/// One term `coefficient * factor(z) * prod_j (g^(j))^{S_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coefficient: i128,
    /// Optional function coefficient multiplying the integer one.
    pub factor: Option<Expr>,
    pub index: MultiIndex,
}

/// Differential polynomial in a single generator `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffPolynomial {
    terms: Vec<Term>,
}

impl DiffPolynomial {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParams("differential polynomial has no terms".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.coefficient == 0 || t.factor.as_ref().is_some_and(Expr::is_zero) {
                return Err(Error::InvalidParams(format!("term {} has a zero coefficient", i + 1)));
            }
            if t.index.total_degree() == 0 {
                return Err(Error::InvalidParams(format!(
                    "term {} has no positive exponent",
                    i + 1
                )));
            }
        }
        Ok(DiffPolynomial { terms })
    }

    fn from_map(map: TermMap, factor: Option<Expr>) -> Vec<Term> {
        map.into_iter()
            .map(|(index, coefficient)| Term {
                coefficient,
                factor: factor.clone(),
                index,
            })
            .collect()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Highest derivative order that occurs.
    pub fn max_order(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.index.exponents().len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// Symbolic composition `P[g]` as an expression in `z`.
    pub fn compose(&self, g: &Expr) -> Expr {
        let derivs: Vec<Expr> = std::iter::successors(Some(g.clone()), |d| Some(d.differentiate(1)))
            .take(self.max_order() + 1)
            .collect();
        Expr::sum(self.terms.iter().map(|t| {
            let mut factors = vec![Expr::real(t.coefficient as f64)];
            factors.extend(t.factor.clone());
            factors.extend(
                t.index
                    .exponents()
                    .iter()
                    .enumerate()
                    .map(|(j, &m)| derivs[j].pow(m)),
            );
            Expr::product(factors)
        }))
    }

    /// Parses the printed form, e.g. `6*g*(g')^2 + 3*g^2*g''`.
    pub fn parse(text: &str) -> Result<Self> {
        PolyParser::new(text).parse()
    }
}

/// `d(P) = min_i sum_j S_ij`.
pub fn degree_d(p: &DiffPolynomial) -> u32 {
    p.terms.iter().map(|t| t.index.total_degree()).min().unwrap_or(0)
}

/// `theta(P) = max_i sum_j j S_ij`.
pub fn weight_theta(p: &DiffPolynomial) -> u32 {
    p.terms.iter().map(|t| t.index.weight()).max().unwrap_or(0)
}

fn monomial_terms(spec: &MonomialSpec) -> Result<TermMap> {
    let mut acc = if spec.n == 0 {
        TermMap::from([(MultiIndex::default(), 1)])
    } else {
        power_terms(spec.n)
    };
    for &(nj, tj) in &spec.pairs {
        let factor: TermMap = expand_power_derivative(nj, tj)?
            .into_iter()
            .map(|(c, idx)| (idx, c))
            .collect();
        acc = multiply_terms(&acc, &factor)?;
    }
    Ok(acc)
}

/// Expands `g^n (g^{n_1})^{(t_1)} ... (g^{n_k})^{(t_k)}` into a [`DiffPolynomial`].
pub fn build_standard_monomial(spec: &MonomialSpec) -> Result<DiffPolynomial> {
    DiffPolynomial::new(DiffPolynomial::from_map(monomial_terms(spec)?, None))
}

/// `P[g](z)`; any infinite derivative value makes the result infinite.
pub fn evaluate_diffpoly(p: &DiffPolynomial, g: &Expr, z: Complex64) -> Result<Value> {
    let mut values = Vec::with_capacity(p.max_order() + 1);
    let mut d = g.clone();
    for j in 0..=p.max_order() {
        if j > 0 {
            d = d.differentiate(1);
        }
        values.push(d.eval(z)?);
    }
    let mut acc = Complex64::zero();
    for t in &p.terms {
        let mut term = Complex64::new(t.coefficient as f64, 0.0);
        if let Some(f) = &t.factor {
            match f.eval(z)? {
                Value::Finite(v) => term *= v,
                Value::Infinity => return Ok(Value::Infinity),
            }
        }
        for (j, &m) in t.index.exponents().iter().enumerate() {
            if m == 0 {
                continue;
            }
            match values[j] {
                Value::Finite(v) => term *= v.powu(m),
                Value::Infinity => return Ok(Value::Infinity),
            }
        }
        acc += term;
    }
    Ok(Value::Finite(acc))
}

/// `alpha = sum t_j / (n + sum n_j)`, exact.
pub fn alpha_index(spec: &MonomialSpec) -> Result<BigRational> {
    let den = spec.total_power();
    if den == 0 {
        return Err(Error::InvalidParams("alpha index has zero denominator".into()));
    }
    Ok(BigRational::new(
        BigInt::from(spec.total_order()),
        BigInt::from(den),
    ))
}

/// `main + sum_I c_I * extra_I`, after checking `alpha_I < alpha` for every extra.
pub fn generalized_polynomial(
    main: &MonomialSpec,
    extras: &[(Expr, MonomialSpec)],
) -> Result<DiffPolynomial> {
    let alpha = alpha_index(main)?;
    let mut terms = DiffPolynomial::from_map(monomial_terms(main)?, None);
    for (i, (coefficient, spec)) in extras.iter().enumerate() {
        let alpha_i = alpha_index(spec)?;
        if alpha_i >= alpha {
            return Err(Error::AlphaViolation {
                index: i + 1,
                extra: alpha_i.to_string(),
                main: alpha.to_string(),
            });
        }
        if coefficient.is_zero() {
            continue;
        }
        let factor = (!coefficient.as_constant().is_some_and(|c| c == Complex64::new(1.0, 0.0)))
            .then(|| coefficient.clone());
        terms.extend(DiffPolynomial::from_map(monomial_terms(spec)?, factor));
    }
    DiffPolynomial::new(terms)
}

fn derivative_token(order: usize) -> String {
    match order {
        0 => "g".into(),
        1 => "g'".into(),
        2 => "g''".into(),
        j => format!("g^({j})"),
    }
}

impl fmt::Display for DiffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            if i > 0 {
                f.write_str(if t.coefficient < 0 { " - " } else { " + " })?;
            } else if t.coefficient < 0 {
                f.write_str("-")?;
            }
            if t.coefficient.abs() != 1 {
                factors.push(t.coefficient.abs().to_string());
            }
            if let Some(c) = &t.factor {
                factors.push(format!("({c})"));
            }
            for (j, &m) in t.index.exponents().iter().enumerate() {
                let tok = derivative_token(j);
                match m {
                    0 => {}
                    1 => factors.push(tok),
                    _ if j == 0 => factors.push(format!("{tok}^{m}")),
                    _ => factors.push(format!("({tok})^{m}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

struct PolyParser {
    chars: Vec<char>,
    pos: usize,
}

impl PolyParser {
    fn new(text: &str) -> Self {
        PolyParser {
            chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn err<T>(&self, message: &str) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .or_else(|_| self.err("integer out of range"))
    }

    /// `g`, `g'`, `g''`, `g^(j)`; returns the derivative order.
    fn token(&mut self) -> Result<usize> {
        if !self.eat('g') {
            return self.err("expected g");
        }
        let mut order = 0;
        while self.eat('\'') {
            order += 1;
        }
        if order == 0 && self.chars.get(self.pos..self.pos + 2) == Some(&['^', '(']) {
            self.pos += 2;
            order = self.integer()? as usize;
            if !self.eat(')') {
                return self.err("expected ')'");
            }
        }
        Ok(order)
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.eat('^') {
            u32::try_from(self.integer()?).or_else(|_| self.err("exponent too large"))
        } else {
            Ok(1)
        }
    }

    fn term(&mut self, sign: i128) -> Result<Term> {
        let mut coefficient = sign;
        let mut exps: Vec<u32> = Vec::new();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let v = i128::from(self.integer()?);
                    coefficient = coefficient.checked_mul(v).ok_or(Error::CoefficientOverflow)?;
                }
                Some('(') => {
                    self.pos += 1;
                    let order = self.token()?;
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    let m = self.exponent()?;
                    bump(&mut exps, order, m);
                }
                Some('g') => {
                    let order = self.token()?;
                    let m = self.exponent()?;
                    bump(&mut exps, order, m);
                }
                _ => return self.err("expected coefficient or g-token"),
            }
            if !self.eat('*') {
                break;
            }
        }
        Ok(Term {
            coefficient,
            factor: None,
            index: MultiIndex::new(exps),
        })
    }

    fn parse(mut self) -> Result<DiffPolynomial> {
        let mut map: BTreeMap<MultiIndex, i128> = BTreeMap::new();
        let mut sign = if self.eat('-') { -1 } else { 1 };
        loop {
            let t = self.term(sign)?;
            *map.entry(t.index).or_insert(0) += t.coefficient;
            match self.peek() {
                None => break,
                Some('+') => sign = 1,
                Some('-') => sign = -1,
                Some(_) => return self.err("expected '+' or '-'"),
            }
            self.pos += 1;
        }
        map.retain(|_, c| *c != 0);
        DiffPolynomial::new(DiffPolynomial::from_map(map, None))
    }
}

fn bump(exps: &mut Vec<u32>, order: usize, m: u32) {
    if exps.len() <= order {
        exps.resize(order + 1, 0);
    }
    exps[order] += m;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_algebra::parse_function;

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn spec(n: u32, pairs: &[(u32, u32)]) -> MonomialSpec {
        MonomialSpec::new(n, pairs.to_vec()).unwrap()
    }

    #[test]
    fn product_rule_cases() {
        assert_eq!(expand_power_derivative(2, 1).unwrap(), vec![(2, idx(&[1, 1]))]);
        assert_eq!(
            expand_power_derivative(2, 2).unwrap(),
            vec![(2, idx(&[0, 2])), (2, idx(&[1, 0, 1]))]
        );
        assert_eq!(
            expand_power_derivative(3, 2).unwrap(),
            vec![(6, idx(&[1, 2])), (3, idx(&[2, 0, 1]))]
        );
        assert_eq!(expand_power_derivative(4, 0).unwrap(), vec![(1, idx(&[4]))]);
    }

    #[test]
    fn standard_monomials() {
        let p = build_standard_monomial(&spec(1, &[(2, 1)])).unwrap();
        assert_eq!(p.to_string(), "2*g^2*g'");
        let p = build_standard_monomial(&spec(2, &[(2, 1), (2, 1)])).unwrap();
        assert_eq!(p.to_string(), "4*g^4*(g')^2");
        let p = build_standard_monomial(&spec(0, &[(3, 2)])).unwrap();
        assert_eq!(p.to_string(), "6*g*(g')^2 + 3*g^2*g''");
    }

    #[test]
    fn degree_and_weight() {
        let gg = DiffPolynomial::parse("g*g'").unwrap();
        assert_eq!((degree_d(&gg), weight_theta(&gg)), (2, 1));
        let mixed = DiffPolynomial::parse("g^3 + g*g'").unwrap();
        assert_eq!(degree_d(&mixed), 2);
        let third = DiffPolynomial::parse("g^2*g^(3)").unwrap();
        assert_eq!(weight_theta(&third), 3);
        let s = spec(2, &[(3, 2), (1, 1)]);
        let p = build_standard_monomial(&s).unwrap();
        assert_eq!(degree_d(&p), 6);
        assert_eq!(weight_theta(&p), 3);
    }

    #[test]
    fn printed_form_parses_back() {
        let p = build_standard_monomial(&spec(1, &[(3, 3), (2, 1)])).unwrap();
        assert_eq!(DiffPolynomial::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn spec_validation() {
        assert!(MonomialSpec::new(0, vec![(3, 0)]).is_err());
        assert!(MonomialSpec::new(0, vec![]).is_err());
        assert!(MonomialSpec::from_json(r#"{"n":0,"pairs":[[3,0]]}"#).is_err());
        let s = MonomialSpec::from_json(r#"{"n":2,"pairs":[[3,1],[2,2]]}"#).unwrap();
        assert_eq!(s.pairs(), &[(3, 1), (2, 2)]);
    }

    #[test]
    fn alpha_examples() {
        let a = alpha_index(&spec(0, &[(4, 3)])).unwrap();
        assert_eq!(a, BigRational::new(3.into(), 4.into()));
        let a = alpha_index(&spec(3, &[(3, 1)])).unwrap();
        assert_eq!(a.to_string(), "1/6");
    }

    #[test]
    fn generalized_polynomial_checks_alpha() {
        let main = spec(1, &[(1, 1)]); // alpha = 1/2
        let plain = generalized_polynomial(&main, &[]).unwrap();
        assert_eq!(plain, build_standard_monomial(&main).unwrap());
        let ok = spec(1, &[(2, 1)]); // 1/3
        let p = generalized_polynomial(&main, &[(Expr::var(), ok)]).unwrap();
        assert_eq!(p.terms().len(), 2);
        let same = spec(0, &[(2, 1)]); // 1/2
        assert!(matches!(
            generalized_polynomial(&main, &[(Expr::one(), same)]),
            Err(Error::AlphaViolation { index: 1, .. })
        ));
    }

    #[test]
    fn evaluation_matches_composition() {
        let g = parse_function("z").unwrap();
        let p = build_standard_monomial(&spec(1, &[(2, 1)])).unwrap();
        let z = Complex64::new(0.7, -0.2);
        let v = evaluate_diffpoly(&p, &g, z).unwrap().finite().unwrap();
        assert!((v - 2.0 * z * z).norm() < 1e-14);
    }

    #[test]
    fn linear_generator_degenerate_case() {
        // n_j = t_j: value is c (a z + b)^{n + sum(n_j - t_j)}.
        let g = parse_function("2*z+1").unwrap();
        let s = spec(1, &[(2, 2)]);
        let p = build_standard_monomial(&s).unwrap();
        let z = Complex64::new(0.3, 0.4);
        let v = evaluate_diffpoly(&p, &g, z).unwrap().finite().unwrap();
        // g * (g^2)'' = g * 2 * (g')^2 = 8 (2z + 1)
        assert!((v - 8.0 * (2.0 * z + 1.0)).norm() < 1e-13);
    }
}
