//! Polynomial vector fields on ℝⁿ, their Lie brackets, and the text grammar
//! `field := term (('+'|'-') term)*`, `term := [coeff '*'] [mono '*'] 'd/d' var`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{fmt_monomial, Monomial, Polynomial};
use crate::rational::{fmt_q, Q};

/// `Σ fᵢ ∂ᵢ` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    components: Vec<Polynomial>,
}

impl VectorField {
    pub fn zero(n: usize) -> Self {
        VectorField {
            components: (0..n).map(|_| Polynomial::zero(n)).collect(),
        }
    }

    /// Coordinate field `∂ᵢ`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.components[i] = Polynomial::one(n);
        f
    }

    pub fn from_components(components: Vec<Polynomial>) -> Result<Self> {
        let n = components.len();
        for c in &components {
            if c.n_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.n_vars(),
                });
            }
        }
        Ok(VectorField { components })
    }

    pub fn n_vars(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.scale(s)).collect(),
        }
    }

    /// `f · X`.
    pub fn mul_poly(&self, f: &Polynomial) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.mul(f)).collect(),
        }
    }

    /// `X(f) = Σ Xᵢ ∂ᵢ f`.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.n_vars());
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&c.mul(&f.derivative(i)));
        }
        out
    }

    pub fn evaluate(&self, p: &[Q]) -> Result<Vec<Q>> {
        if p.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                found: p.len(),
            });
        }
        Ok(self.components.iter().map(|c| c.evaluate(p)).collect())
    }

    pub fn evaluate_f64(&self, p: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.evaluate_f64(p)).collect()
    }

    /// Re-expansion of every component around `point`.
    pub fn shift(&self, point: &[Q]) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.shift(point)).collect(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// `Some(s)` with `self = s · other` when `other ≠ 0` and the two are proportional.
    pub fn ratio_to(&self, other: &VectorField) -> Option<Q> {
        let mut ratio: Option<Q> = None;
        for (a, b) in self.components.iter().zip(&other.components) {
            for (m, cb) in b.terms() {
                let ca = a.coeff(m);
                let r = ca / cb;
                match &ratio {
                    None => ratio = Some(r),
                    Some(r0) if *r0 == r => {}
                    Some(_) => return None,
                }
            }
        }
        let r = ratio?;
        if other.scale(&r) == *self {
            Some(r)
        } else {
            None
        }
    }

    pub fn display(&self, names: &[String]) -> String {
        let mut s = String::new();
        let mut first = true;
        for (i, c) in self.components.iter().enumerate() {
            for (m, coef) in c.terms().rev() {
                let neg = coef.is_negative();
                let a = coef.abs();
                if first {
                    if neg {
                        s.push('-');
                    }
                } else {
                    s.push_str(if neg { " - " } else { " + " });
                }
                first = false;
                if !a.is_one() {
                    s.push_str(&fmt_q(&a));
                    s.push('*');
                }
                let mono = fmt_monomial(m, names);
                if !mono.is_empty() {
                    s.push_str(&mono);
                    s.push('*');
                }
                let _ = write!(s, "d/d{}", names[i]);
            }
        }
        if first {
            s.push('0');
        }
        s
    }
}

/// `[X, Y] = X(Y) − Y(X)` componentwise.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.n_vars() != y.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: x.n_vars(),
            found: y.n_vars(),
        });
    }
    let components = (0..x.n_vars())
        .map(|i| x.apply(y.component(i)).sub(&y.apply(x.component(i))))
        .collect();
    Ok(VectorField { components })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Int(bytes[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: i,
                msg: alloc::format!("unexpected character `{}`", c),
            });
        }
    }
    Ok(out)
}

struct FieldParser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl<'a> FieldParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.here(),
            msg: msg.to_string(),
        })
    }

    fn var_index(&self, name: &str, pos: usize) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable {
                name: name.to_string(),
                pos,
            })
    }

    fn is_derivative_start(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == "d")
            && matches!(self.peek_at(1), Some(Tok::Sym('/')))
    }

    fn parse_int(&mut self) -> Result<u32> {
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.pos += 1;
                s.parse().or_else(|_| self.err("integer out of range"))
            }
            _ => self.err("expected integer"),
        }
    }

    fn parse_term(&mut self, n: usize) -> Result<VectorField> {
        let mut coeff = Q::one();
        if let Some(Tok::Int(s)) = self.peek().cloned() {
            self.pos += 1;
            let num: num_bigint::BigInt = s.parse().unwrap();
            let mut c = Q::from_integer(num);
            if matches!(self.peek(), Some(Tok::Sym('/'))) {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Int(d)) => {
                        self.pos += 1;
                        let den: num_bigint::BigInt = d.parse().unwrap();
                        if den.is_zero() {
                            return self.err("zero denominator");
                        }
                        c /= Q::from_integer(den);
                    }
                    _ => return self.err("expected denominator"),
                }
            }
            coeff = c;
            if !matches!(self.peek(), Some(Tok::Sym('*'))) {
                return self.err("expected `*` after coefficient");
            }
            self.pos += 1;
        }
        let mut mono = Monomial::one(n);
        if !self.is_derivative_start() {
            loop {
                let pos = self.here();
                let name = match self.peek().cloned() {
                    Some(Tok::Ident(s)) => s,
                    _ => return self.err("expected variable or `d/d`"),
                };
                self.pos += 1;
                let i = self.var_index(&name, pos)?;
                let mut e = 1;
                if matches!(self.peek(), Some(Tok::Sym('^'))) {
                    self.pos += 1;
                    e = self.parse_int()?;
                }
                mono.0[i] += e;
                if !matches!(self.peek(), Some(Tok::Sym('*'))) {
                    return self.err("expected `*` before `d/d`");
                }
                self.pos += 1;
                if self.is_derivative_start() {
                    break;
                }
            }
        }
        // 'd' '/' 'd<var>'
        self.pos += 2;
        let pos = self.here();
        let var = match self.peek().cloned() {
            Some(Tok::Ident(s)) if s.len() > 1 && s.starts_with('d') => s[1..].to_string(),
            _ => return self.err("expected `d<variable>` after `d/`"),
        };
        self.pos += 1;
        let i = self.var_index(&var, pos + 1)?;
        let mut comps: Vec<Polynomial> = (0..n).map(|_| Polynomial::zero(n)).collect();
        comps[i] = Polynomial::term(n, mono, coeff);
        VectorField::from_components(comps)
    }
}

/// Parses a vector field over the declared variables. Whitespace is insignificant.
pub fn parse_field(src: &str, vars: &[String]) -> Result<VectorField> {
    let n = vars.len();
    let toks = tokenize(src)?;
    let mut p = FieldParser {
        end: src.chars().count(),
        toks,
        pos: 0,
        vars,
    };
    if p.toks.len() == 1 && p.toks[0].1 == Tok::Int("0".into()) {
        return Ok(VectorField::zero(n));
    }
    let mut acc = VectorField::zero(n);
    let mut sign = Q::one();
    if matches!(p.peek(), Some(Tok::Sym('-'))) {
        p.pos += 1;
        sign = -Q::one();
    }
    loop {
        let t = p.parse_term(n)?;
        acc = acc.add(&t.scale(&sign));
        match p.peek() {
            None => break,
            Some(Tok::Sym('+')) => sign = Q::one(),
            Some(Tok::Sym('-')) => sign = -Q::one(),
            _ => return p.err("expected `+`, `-` or end of input"),
        }
        p.pos += 1;
    }
    Ok(acc)
}
