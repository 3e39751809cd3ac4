//! Sparse multivariate polynomials with exact rational coefficients.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_q, pow_u, Q};

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if b > a {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial(out))
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `n` variables of total degree at most `d`, in graded-lex order.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=d {
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, deg);
    }
    out.sort();
    out
}

fn fill(out: &mut Vec<Monomial>, cur: &mut Vec<u32>, i: usize, left: u32) {
    let n = cur.len();
    if n == 0 {
        if left == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if i == n - 1 {
        cur[i] = left;
        out.push(Monomial(cur.clone()));
        cur[i] = 0;
        return;
    }
    for e in 0..=left {
        cur[i] = e;
        fill(out, cur, i + 1, left - e);
    }
    cur[i] = 0;
}

/// Polynomial in `n_vars` variables. No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    n_vars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: Q) -> Self {
        Self::term(n_vars, Monomial::one(n_vars), c)
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, Q::one())
    }

    pub fn var(n_vars: usize, i: usize) -> Self {
        Self::term(n_vars, Monomial::var(n_vars, i), Q::one())
    }

    pub fn term(n_vars: usize, m: Monomial, c: Q) -> Self {
        debug_assert_eq!(m.0.len(), n_vars);
        let mut p = Self::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Constant term if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, s: &Q) -> Polynomial {
        if s.is_zero() {
            return Self::zero(self.n_vars);
        }
        Polynomial {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * s))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.n_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Self::one(self.n_vars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative along variable `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Self::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] = e - 1;
            out.add_term(m2, c * Q::from_integer(e.into()));
        }
        out
    }

    /// Higher partial derivative `∂^alpha`.
    pub fn derivative_multi(&self, alpha: &[u32]) -> Polynomial {
        let mut out = self.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                out = out.derivative(i);
            }
        }
        out
    }

    pub fn evaluate(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    v *= pow_u(x, e);
                }
            }
            acc += v;
        }
        acc
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut v = crate::rational::to_f64(c);
            for (x, &e) in point.iter().zip(&m.0) {
                v *= libm::pow(*x, e as f64);
            }
            acc += v;
        }
        acc
    }

    /// Re-expands around `point`: returns `q` with `q(u) = self(point + u)`.
    pub fn shift(&self, point: &[Q]) -> Polynomial {
        let n = self.n_vars;
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let mut acc = Self::constant(n, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let lin = Self::var(n, i).add(&Self::constant(n, point[i].clone()));
                acc = acc.mul(&lin.pow(e));
            }
            out = out.add(&acc);
        }
        out
    }

    /// Drops all terms of total degree above `d`.
    pub fn truncate(&self, d: u32) -> Polynomial {
        Polynomial {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitutes variable `i` by the polynomial `p` (same variable count).
    pub fn substitute(&self, i: usize, p: &Polynomial) -> Polynomial {
        let n = self.n_vars;
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.0[i];
            rest.0[i] = 0;
            let t = Self::term(n, rest, c.clone()).mul(&p.pow(e));
            out = out.add(&t);
        }
        out
    }

    /// Human-readable form using the given variable names, e.g. `3/2*x^2*y - 1`.
    pub fn display(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = fmt_monomial(m, names);
            match (a.is_one(), mono.is_empty()) {
                (true, true) => s.push('1'),
                (true, false) => s.push_str(&mono),
                (false, true) => s.push_str(&fmt_q(&a)),
                (false, false) => {
                    let _ = write!(s, "{}*{}", fmt_q(&a), mono);
                }
            }
        }
        s
    }
}

/// `x^2*y`, empty string for the unit monomial.
pub fn fmt_monomial(m: &Monomial, names: &[String]) -> String {
    let mut s = String::new();
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push('*');
        }
        s.push_str(&names[i]);
        if e > 1 {
            let _ = write!(s, "^{}", e);
        }
    }
    s
}
