//! Weighted noncommutative operators `Σ f_w(x)·X_{w₁}⋯X_{w_m}` and their
//! principal symbols `Σ f_w(x)·dπ([X_{w₁}])∘⋯∘dπ([X_{w_m}])` over the
//! words of exactly the declared weight.
//!
//! Coefficients are kept to the left of each word. Moving a coefficient past a
//! generator only creates words of strictly lower weight, so the top part is
//! unaffected.
//!
//! Expression grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := ['-'] factor ('*' factor)*
//! factor := atom ('^' integer)?
//! atom   := number ('/' number)? | name | '(' expr ')'
//! ```
//!
//! A name is a generator, a coordinate of the manifold or a bound parameter,
//! looked up in that order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::diffop::{CPoly, DiffOp};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::orbit::Representation;
use crate::osculating::OsculatingAlgebra;
use crate::poly::Polynomial;
use crate::rational::{parse_q, Q};
use crate::weight::WeightVector;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub weight: WeightVector,
    pub field: VectorField,
}

/// Word (generator indices, leftmost first) to coefficient on M.
type NcPoly = BTreeMap<Vec<usize>, Polynomial>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedOperator {
    generators: Vec<Generator>,
    terms: NcPoly,
    order: WeightVector,
    n_vars: usize,
}

impl WeightedOperator {
    /// Checks that every word has weight `⪯ order`.
    pub fn new(generators: Vec<Generator>, terms: Vec<(Polynomial, Vec<usize>)>, order: WeightVector, n_vars: usize) -> Result<Self> {
        let mut map = NcPoly::new();
        for (c, w) in terms {
            nc_add(&mut map, w, c, n_vars);
        }
        let op = WeightedOperator {
            generators,
            terms: map,
            order,
            n_vars,
        };
        for w in op.terms.keys() {
            if w.iter().any(|&g| g >= op.generators.len()) {
                return Err(Error::Invalid(format!("word refers to generator {w:?} out of range")));
            }
            let ww = op.word_weight(w);
            if ww.nu() != op.order.nu() {
                return Err(Error::WeightLength(format!("word {}", op.word_name(w))));
            }
            if !ww.preceq(&op.order) {
                return Err(Error::Invalid(format!(
                    "word {} has weight {ww}, above the declared order {}",
                    op.word_name(w),
                    op.order
                )));
            }
        }
        Ok(op)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn order(&self) -> &WeightVector {
        &self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Polynomial)> {
        self.terms.iter()
    }

    pub fn word_weight(&self, w: &[usize]) -> WeightVector {
        let nu = self.order.nu();
        w.iter()
            .fold(WeightVector::zero(nu), |acc, &g| acc.add(&self.generators[g].weight))
    }

    pub fn word_name(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return String::from("1");
        }
        w.iter().map(|&g| self.generators[g].name.as_str()).collect::<Vec<_>>().join("*")
    }

    /// Words of weight exactly the declared order.
    pub fn max_part(&self) -> WeightedOperator {
        let mut out = self.clone();
        let order = self.order.clone();
        out.terms.retain(|w, _| self.word_weight(w) == order);
        out
    }

    /// Same words at a different declared order.
    pub fn with_order(&self, order: WeightVector) -> Result<WeightedOperator> {
        let terms = self.terms.iter().map(|(w, c)| (c.clone(), w.clone())).collect();
        WeightedOperator::new(self.generators.clone(), terms, order, self.n_vars)
    }

    /// `P·Q` at order `k + l`.
    pub fn product(&self, o: &WeightedOperator) -> Result<WeightedOperator> {
        if self.generators != o.generators {
            return Err(Error::Invalid(String::from("operators use different generators")));
        }
        let mut terms = Vec::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let w: Vec<usize> = w1.iter().chain(w2).copied().collect();
                terms.push((c1.mul(c2), w));
            }
        }
        WeightedOperator::new(self.generators.clone(), terms, self.order.add(&o.order), self.n_vars)
    }

    /// Top part of the formal adjoint for real generators:
    /// `(f·X₁⋯X_m)* ≡ (−1)^m X_m⋯X₁·f` modulo lower weight.
    pub fn adjoint(&self) -> WeightedOperator {
        let mut terms = NcPoly::new();
        for (w, c) in &self.terms {
            let rev: Vec<usize> = w.iter().rev().copied().collect();
            let c = if w.len() % 2 == 1 { c.neg() } else { c.clone() };
            nc_add(&mut terms, rev, c, self.n_vars);
        }
        WeightedOperator {
            terms,
            ..self.clone()
        }
    }

    pub fn display(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return String::from("0");
        }
        self.terms
            .iter()
            .map(|(w, c)| {
                let cs = c.display(vars);
                if w.is_empty() {
                    cs
                } else if c.as_constant().is_some_and(|v| v.is_one()) {
                    self.word_name(w)
                } else {
                    format!("({cs})*{}", self.word_name(w))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn nc_add(map: &mut NcPoly, w: Vec<usize>, c: Polynomial, n_vars: usize) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(w.clone()).or_insert_with(|| Polynomial::zero(n_vars));
    *e = e.add(&c);
    if e.is_zero() {
        map.remove(&w);
    }
}

/// `σ(P, π, x)`: coefficients at `x`, generators to `dπ([X]_{ω(X),x})`,
/// words composed left to right, summed over the max part.
pub fn principal_symbol(p: &WeightedOperator, rep: &Representation, osc: &OsculatingAlgebra) -> Result<DiffOp> {
    let k = rep.k;
    let mut images: BTreeMap<usize, DiffOp> = BTreeMap::new();
    let mut out = DiffOp::zero(k);
    for (w, c) in p.max_part().terms() {
        let mut op = DiffOp::identity(k);
        for &g in w {
            if !images.contains_key(&g) {
                let gen = &p.generators[g];
                let class = osc.class_of(&gen.field, &gen.weight)?;
                images.insert(g, rep.apply(&class));
            }
            op = op.compose(&images[&g])?;
            if op.is_zero() {
                break;
            }
        }
        let v = c.evaluate(osc.point());
        out = out.add(&op.scale(&v))?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Name(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            let text = &src[chars[start].0..end];
            out.push((pos, Tok::Num(parse_q(text).expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            out.push((pos, Tok::Name(String::from(&src[chars[start].0..end]))));
        } else if "+-*^()/".contains(c) {
            out.push((pos, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    generators: &'a [Generator],
    vars: &'a [String],
    params: &'a [(String, Q)],
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn peek_op(&self, c: char) -> bool {
        matches!(self.toks.get(self.at), Some((_, Tok::Op(d))) if *d == c)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: String::from(msg),
        })
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<NcPoly> {
        let mut acc = self.term()?;
        loop {
            let sign = if self.peek_op('+') {
                Q::one()
            } else if self.peek_op('-') {
                -Q::one()
            } else {
                return Ok(acc);
            };
            self.at += 1;
            let t = self.term()?;
            for (w, c) in t {
                nc_add(&mut acc, w, c.scale(&sign), self.n());
            }
        }
    }

    fn term(&mut self) -> Result<NcPoly> {
        let neg = self.peek_op('-');
        if neg {
            self.at += 1;
        }
        let mut acc = self.factor()?;
        while self.peek_op('*') {
            self.at += 1;
            let f = self.factor()?;
            acc = nc_mul(&acc, &f, self.n());
        }
        if neg {
            acc = acc.into_iter().map(|(w, c)| (w, c.neg())).collect();
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<NcPoly> {
        let base = self.atom()?;
        if !self.peek_op('^') {
            return Ok(base);
        }
        self.at += 1;
        let e = match self.toks.get(self.at) {
            Some((_, Tok::Num(v))) if v.is_integer() => v.to_integer(),
            _ => return self.err("expected an integer exponent"),
        };
        let e: u32 = match u32::try_from(e) {
            Ok(e) if e <= 64 => e,
            _ => return self.err("exponent out of range"),
        };
        self.at += 1;
        let mut out = unit(self.n());
        for _ in 0..e {
            out = nc_mul(&out, &base, self.n());
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<NcPoly> {
        let n = self.n();
        match self.toks.get(self.at).cloned() {
            Some((_, Tok::Num(v))) => {
                self.at += 1;
                let mut v = v;
                if self.peek_op('/') {
                    self.at += 1;
                    match self.toks.get(self.at) {
                        Some((_, Tok::Num(d))) if !d.is_zero() => v /= d,
                        _ => return self.err("expected a nonzero denominator"),
                    }
                    self.at += 1;
                }
                Ok(scalar(n, Polynomial::constant(n, v)))
            }
            Some((pos, Tok::Name(name))) => {
                self.at += 1;
                if let Some(g) = self.generators.iter().position(|g| g.name == name) {
                    let mut m = NcPoly::new();
                    m.insert(vec![g], Polynomial::one(n));
                    return Ok(m);
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(scalar(n, Polynomial::var(n, i)));
                }
                if let Some((_, v)) = self.params.iter().find(|(p, _)| *p == name) {
                    return Ok(scalar(n, Polynomial::constant(n, v.clone())));
                }
                Err(Error::UnknownVariable { name, pos })
            }
            Some((_, Tok::Op('('))) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.peek_op(')') {
                    return self.err("expected ')'");
                }
                self.at += 1;
                Ok(e)
            }
            _ => self.err("expected a number, name or '('"),
        }
    }
}

fn unit(n: usize) -> NcPoly {
    scalar(n, Polynomial::one(n))
}

fn scalar(n: usize, p: Polynomial) -> NcPoly {
    let mut m = NcPoly::new();
    nc_add(&mut m, Vec::new(), p, n);
    m
}

fn nc_mul(a: &NcPoly, b: &NcPoly, n: usize) -> NcPoly {
    let mut out = NcPoly::new();
    for (w1, c1) in a {
        for (w2, c2) in b {
            let w: Vec<usize> = w1.iter().chain(w2).copied().collect();
            nc_add(&mut out, w, c1.mul(c2), n);
        }
    }
    out
}

/// Parses an operator expression over the given generators, manifold
/// coordinates and parameter values.
pub fn parse_operator(
    src: &str,
    generators: Vec<Generator>,
    vars: &[String],
    params: &[(String, Q)],
    order: WeightVector,
) -> Result<WeightedOperator> {
    let mut seen: Vec<&str> = Vec::new();
    for name in generators
        .iter()
        .map(|g| g.name.as_str())
        .chain(vars.iter().map(String::as_str))
        .chain(params.iter().map(|p| p.0.as_str()))
    {
        if seen.contains(&name) {
            return Err(Error::Invalid(format!("name '{name}' is bound twice")));
        }
        seen.push(name);
    }
    let mut p = Parser {
        toks: tokenize(src)?,
        at: 0,
        end: src.len(),
        generators: &generators,
        vars,
        params,
    };
    if p.toks.is_empty() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    let terms = e.into_iter().map(|(w, c)| (c, w)).collect();
    WeightedOperator::new(generators, terms, order, vars.len())
}

/// Multiplication by `re + i·im` on ℝᵏ.
pub fn scalar_op(k: usize, re: Q, im: Q) -> DiffOp {
    DiffOp::multiplication(CPoly::constant(k, re, im))
}
