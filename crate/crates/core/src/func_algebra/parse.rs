//! Text form of expressions.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := ['-'] INT | '(' ['-'] INT ')'
//! primary  := NUMBER | NUMBER 'i' | 'i' | 'z' | PARAM
//!           | 'exp' '(' expr ')' | 'D' '[' expr ',' INT ']' | '(' expr ')'
//! ```
//!
//! The printer emits the same grammar, so `parse(print(e))` denotes the same
//! function as `e`.

use std::fmt;

use num_complex::Complex64;

use super::expr::{Expr, Node};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
    Imag(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer {
            chars: src.chars().collect(),
            pos: 0,
            _src: src,
        };
        let mut out = Vec::new();
        loop {
            while lx.peek().is_some_and(char::is_whitespace) {
                lx.pos += 1;
            }
            let start = lx.pos;
            let Some(ch) = lx.peek() else {
                out.push((start, Tok::End));
                return Ok(out);
            };
            let tok = if ch.is_ascii_digit() || ch == '.' {
                lx.number(start)?
            } else if ch.is_alphabetic() || ch == '_' {
                let mut name = String::new();
                while let Some(c) = lx.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
                    name.push(c);
                    lx.pos += 1;
                }
                Tok::Ident(name)
            } else if "+-*/^()[],".contains(ch) {
                lx.pos += 1;
                Tok::Sym(ch)
            } else {
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character '{ch}'"),
                });
            };
            out.push((start, tok));
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        let mut text = String::new();
        let mut integer = true;
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit() || *c == '.') {
            integer &= c != '.';
            text.push(c);
            self.pos += 1;
        }
        // Exponent part only when followed by digits, so that `2e` is not swallowed.
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            let mut exp = String::from("e");
            self.pos += 1;
            if let Some(sign) = self.peek().filter(|c| *c == '+' || *c == '-') {
                exp.push(sign);
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                    exp.push(c);
                    self.pos += 1;
                }
                text.push_str(&exp);
                integer = false;
            } else {
                self.pos = save;
            }
        }
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("malformed number '{text}'"),
        })?;
        let imaginary = self.peek() == Some('i')
            && !self
                .chars
                .get(self.pos + 1)
                .is_some_and(|c| c.is_alphanumeric() || *c == '_');
        if imaginary {
            self.pos += 1;
            return Ok(Tok::Imag(value));
        }
        Ok(Tok::Num { value, integer })
    }
}

struct Parser<'p> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    params: &'p [(&'p str, Complex64)],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].1
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].1.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, sym: char) -> Result<()> {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{sym}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    let rhs = self.unary()?;
                    if rhs.is_zero() {
                        return self.err("division by the constant zero");
                    }
                    acc = acc.div(&rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        let magnitude = u32::try_from(exponent.unsigned_abs())
            .map_err(|_| Error::Unsupported("exponent too large".into()))?;
        if exponent < 0 {
            if base.is_zero() {
                return self.err("negative power of zero");
            }
            Ok(base.pow(magnitude).recip())
        } else {
            Ok(base.pow(magnitude))
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        let parenthesized = *self.peek() == Tok::Sym('(');
        if parenthesized {
            self.bump();
        }
        let negative = match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                true
            }
            Tok::Sym('+') => {
                self.bump();
                false
            }
            _ => false,
        };
        let value = match self.bump() {
            Tok::Num {
                value,
                integer: true,
            } if value <= i32::MAX as f64 => value as i64,
            Tok::Num { .. } | Tok::Imag(_) => {
                return Err(Error::Unsupported(
                    "only integer exponents are supported".into(),
                ))
            }
            _ => return self.err("expected integer exponent"),
        };
        if parenthesized {
            self.expect(')')?;
        }
        Ok(if negative { -value } else { value })
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num { value, .. } => Ok(Expr::real(value)),
            Tok::Imag(v) => Ok(Expr::constant(Complex64::new(0.0, v))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(Expr::var()),
                "i" => Ok(Expr::constant(Complex64::i())),
                "exp" => {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    let p = arg.expand_polynomial().ok_or_else(|| {
                        Error::Unsupported("exp argument must be a polynomial in z".into())
                    })?;
                    Ok(Expr::exp(p))
                }
                "D" => {
                    self.expect('[')?;
                    let operand = self.expr()?;
                    self.expect(',')?;
                    let order = match self.bump() {
                        Tok::Num {
                            value,
                            integer: true,
                        } if value >= 1.0 && value <= u32::MAX as f64 => value as u32,
                        _ => return self.err("derivative order must be a positive integer"),
                    };
                    self.expect(']')?;
                    Ok(Expr::derivative(&operand, order))
                }
                other => match self.params.iter().find(|(p, _)| *p == other) {
                    Some((_, value)) => Ok(Expr::constant(*value)),
                    None => Err(Error::Syntax {
                        position: pos,
                        message: format!("unknown identifier '{other}'"),
                    }),
                },
            },
            Tok::End => Err(Error::Syntax {
                position: pos,
                message: "unexpected end of input".into(),
            }),
            Tok::Sym(c) => Err(Error::Syntax {
                position: pos,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

/// Parses an expression in `z`.
pub fn parse_function(text: &str) -> Result<Expr> {
    parse_with_params(text, &[])
}

/// Parses an expression in `z` where each named parameter is replaced by its value.
pub fn parse_with_params(text: &str, params: &[(&str, Complex64)]) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut parser = Parser {
        toks,
        idx: 0,
        params,
    };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return parser.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses a complex constant such as `2`, `-1.5`, `3i` or `1-2i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    parse_function(text)?.as_constant().ok_or_else(|| Error::Syntax {
        position: 0,
        message: format!("'{text}' is not a complex constant"),
    })
}

fn real_literal(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

/// Literal for a complex constant; parenthesized unless it is a nonnegative real.
pub fn complex_literal(c: Complex64) -> String {
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            format!("({})", real_literal(c.re))
        } else {
            real_literal(c.re)
        }
    } else if c.re == 0.0 {
        format!("({}i)", real_literal(c.im))
    } else {
        let sign = if c.im.is_sign_negative() { '-' } else { '+' };
        format!("({}{}{}i)", real_literal(c.re), sign, real_literal(c.im.abs()))
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Sum,
    Product,
    Atom,
}

fn precedence(e: &Expr) -> Prec {
    match e.node() {
        Node::Sum(_) => Prec::Sum,
        Node::Product(_) | Node::Quotient(..) => Prec::Product,
        _ => Prec::Atom,
    }
}

fn write_at(e: &Expr, f: &mut fmt::Formatter<'_>, min: Prec) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "(")?;
        write_expr(e, f)?;
        write!(f, ")")
    } else {
        write_expr(e, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Constant(c) => f.write_str(&complex_literal(*c)),
        Node::Variable => f.write_str("z"),
        Node::Poly(p) => write!(f, "({p})"),
        Node::Exp(p) => write!(f, "exp({p})"),
        Node::Sum(ts) => {
            for (k, t) in ts.iter().enumerate() {
                if k > 0 {
                    f.write_str("+")?;
                }
                write_at(t, f, Prec::Sum)?;
            }
            Ok(())
        }
        Node::Product(fs) => {
            for (k, x) in fs.iter().enumerate() {
                if k > 0 {
                    f.write_str("*")?;
                }
                // Quotients as factors are parenthesized to keep left-to-right grouping.
                if matches!(x.node(), Node::Quotient(..)) {
                    write!(f, "(")?;
                    write_expr(x, f)?;
                    write!(f, ")")?;
                } else {
                    write_at(x, f, Prec::Product)?;
                }
            }
            Ok(())
        }
        Node::IntegerPower(b, k) => {
            write_at(b, f, Prec::Atom)?;
            write!(f, "^{k}")
        }
        Node::Quotient(u, v) => {
            write!(f, "(")?;
            write_expr(u, f)?;
            write!(f, ")/(")?;
            write_expr(v, f)?;
            write!(f, ")")
        }
        Node::Derivative { operand, order, .. } => {
            write!(f, "D[")?;
            write_expr(operand, f)?;
            write!(f, ", {order}]")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}
