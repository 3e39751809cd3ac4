//! Differential operators on ℝᵏ with complex-rational polynomial coefficients,
//! `P = Σ_α c_α(t) ∂^α`, coefficients written to the left of derivatives.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::rational::{q, Q};

/// `re + i·im` with real polynomial parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPoly {
    pub re: Polynomial,
    pub im: Polynomial,
}

impl CPoly {
    pub fn zero(k: usize) -> Self {
        CPoly {
            re: Polynomial::zero(k),
            im: Polynomial::zero(k),
        }
    }

    pub fn real(p: Polynomial) -> Self {
        let k = p.n_vars();
        CPoly {
            re: p,
            im: Polynomial::zero(k),
        }
    }

    pub fn imag(p: Polynomial) -> Self {
        let k = p.n_vars();
        CPoly {
            re: Polynomial::zero(k),
            im: p,
        }
    }

    pub fn constant(k: usize, re: Q, im: Q) -> Self {
        CPoly {
            re: Polynomial::constant(k, re),
            im: Polynomial::constant(k, im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &CPoly) -> CPoly {
        CPoly {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn sub(&self, o: &CPoly) -> CPoly {
        CPoly {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    pub fn neg(&self) -> CPoly {
        CPoly {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, o: &CPoly) -> CPoly {
        CPoly {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale(&self, s: &Q) -> CPoly {
        CPoly {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    pub fn conj(&self) -> CPoly {
        CPoly {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn derivative_multi(&self, alpha: &[u32]) -> CPoly {
        CPoly {
            re: self.re.derivative_multi(alpha),
            im: self.im.derivative_multi(alpha),
        }
    }

    /// Value at a rational point as `(re, im)`.
    pub fn evaluate(&self, t: &[Q]) -> (Q, Q) {
        (self.re.evaluate(t), self.im.evaluate(t))
    }

    pub fn display(&self, names: &[String]) -> String {
        let wrap = |s: String| {
            if s[1..].contains([' ', '+']) || s.starts_with('-') {
                format!("({s})")
            } else {
                s
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => String::from("0"),
            (false, true) => self.re.display(names),
            (true, false) => {
                if self.im.as_constant().is_some_and(|c| c.is_one()) {
                    String::from("i")
                } else {
                    format!("i*{}", wrap(self.im.display(names)))
                }
            }
            (false, false) => format!("({} + i*{})", self.re.display(names), wrap(self.im.display(names))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    k: usize,
    /// Multi-index `α` to `c_α`; no zero coefficients.
    terms: BTreeMap<Vec<u32>, CPoly>,
}

fn binomial(n: u32, r: u32) -> Q {
    let mut c = Q::one();
    for i in 0..r {
        c = c * q((n - i) as i64) / q((i + 1) as i64);
    }
    c
}

/// All `γ ≤ α` componentwise.
fn sub_indices(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..=a).map(move |g| {
                    let mut p = p.clone();
                    p.push(g);
                    p
                })
            })
            .collect();
    }
    out
}

impl DiffOp {
    pub fn zero(k: usize) -> Self {
        DiffOp {
            k,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(k: usize) -> Self {
        DiffOp::multiplication(CPoly::constant(k, Q::one(), Q::zero()))
    }

    /// Multiplication by `c(t)`.
    pub fn multiplication(c: CPoly) -> Self {
        let k = c.re.n_vars();
        let mut op = DiffOp::zero(k);
        op.add_term(vec![0; k], c);
        op
    }

    /// `∂/∂tᵢ`.
    pub fn partial(k: usize, i: usize) -> Self {
        let mut alpha = vec![0; k];
        alpha[i] = 1;
        let mut op = DiffOp::zero(k);
        op.add_term(alpha, CPoly::constant(k, Q::one(), Q::zero()));
        op
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CPoly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &[u32]) -> CPoly {
        self.terms.get(alpha).cloned().unwrap_or_else(|| CPoly::zero(self.k))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest derivative order `|α|`, zero for the zero operator.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    /// Highest polynomial degree among coefficients.
    pub fn degree(&self) -> u32 {
        self.terms.values().map(|c| c.re.degree().max(c.im.degree())).max().unwrap_or(0)
    }

    /// The operator as a constant `(re, im)` if it is multiplication by one.
    pub fn as_scalar(&self) -> Option<(Q, Q)> {
        if self.terms.is_empty() {
            return Some((Q::zero(), Q::zero()));
        }
        if self.terms.len() != 1 {
            return None;
        }
        let (alpha, c) = self.terms.iter().next()?;
        if alpha.iter().any(|&a| a > 0) {
            return None;
        }
        Some((c.re.as_constant()?, c.im.as_constant()?))
    }

    pub fn add_term(&mut self, alpha: Vec<u32>, c: CPoly) {
        if c.is_zero() {
            return;
        }
        let k = self.k;
        let e = self.terms.entry(alpha).or_insert_with(|| CPoly::zero(k));
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn check(&self, o: &DiffOp) -> Result<()> {
        if self.k != o.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found: o.k,
            });
        }
        Ok(())
    }

    pub fn add(&self, o: &DiffOp) -> Result<DiffOp> {
        self.check(o)?;
        let mut out = self.clone();
        for (a, c) in &o.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &DiffOp) -> Result<DiffOp> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> DiffOp {
        self.scale_c(&CPoly::constant(self.k, -Q::one(), Q::zero()))
    }

    pub fn scale(&self, s: &Q) -> DiffOp {
        self.scale_c(&CPoly::constant(self.k, s.clone(), Q::zero()))
    }

    /// Left multiplication by `c(t)`.
    pub fn scale_c(&self, c: &CPoly) -> DiffOp {
        let mut out = DiffOp::zero(self.k);
        for (a, v) in &self.terms {
            out.add_term(a.clone(), c.mul(v));
        }
        out
    }

    /// `self ∘ o` by Leibniz: `a∂^α ∘ b∂^β = Σ_{γ≤α} C(α,γ) a·(∂^γ b) ∂^{α−γ+β}`.
    pub fn compose(&self, o: &DiffOp) -> Result<DiffOp> {
        self.check(o)?;
        let mut out = DiffOp::zero(self.k);
        for (alpha, a) in &self.terms {
            for gamma in sub_indices(alpha) {
                let coef = alpha.iter().zip(&gamma).fold(Q::one(), |c, (&n, &r)| c * binomial(n, r));
                for (beta, b) in &o.terms {
                    let db = b.derivative_multi(&gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let idx: Vec<u32> = alpha.iter().zip(&gamma).zip(beta).map(|((a, g), b)| a - g + b).collect();
                    out.add_term(idx, a.mul(&db).scale(&coef));
                }
            }
        }
        Ok(out)
    }

    /// `[self, o] = self∘o − o∘self`.
    pub fn commutator(&self, o: &DiffOp) -> Result<DiffOp> {
        self.compose(o)?.sub(&o.compose(self)?)
    }

    pub fn pow(&self, e: u32) -> DiffOp {
        let mut out = DiffOp::identity(self.k);
        for _ in 0..e {
            out = out.compose(self).expect("same k");
        }
        out
    }

    /// Formal adjoint `P*f = Σ (−1)^{|α|} ∂^α(conj(c_α) f)`.
    pub fn adjoint(&self) -> DiffOp {
        let mut out = DiffOp::zero(self.k);
        for (alpha, c) in &self.terms {
            let mut d = DiffOp::zero(self.k);
            d.add_term(alpha.clone(), CPoly::constant(self.k, Q::one(), Q::zero()));
            let mut term = d.compose(&DiffOp::multiplication(c.conj())).expect("same k");
            if alpha.iter().sum::<u32>() % 2 == 1 {
                term = term.neg();
            }
            out = out.add(&term).expect("same k");
        }
        out
    }

    /// Applies the operator to a complex polynomial.
    pub fn apply(&self, f: &CPoly) -> CPoly {
        self.terms
            .iter()
            .fold(CPoly::zero(self.k), |acc, (a, c)| acc.add(&c.mul(&f.derivative_multi(a))))
    }

    /// Variable names `t` (k = 1) or `t1, t2, …`.
    pub fn default_names(k: usize) -> Vec<String> {
        if k == 1 {
            vec![String::from("t")]
        } else {
            (1..=k).map(|i| format!("t{i}")).collect()
        }
    }

    /// `p(t)*d/dt_j` style expression; `0` for the zero operator.
    pub fn display(&self) -> String {
        let names = DiffOp::default_names(self.k);
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut parts = Vec::new();
        for (alpha, c) in self.terms.iter().rev() {
            let mut d = Vec::new();
            for (i, &a) in alpha.iter().enumerate() {
                match a {
                    0 => {}
                    1 => d.push(format!("d/d{}", names[i])),
                    _ => d.push(format!("d^{a}/d{}^{a}", names[i])),
                }
            }
            let unit = c.im.is_zero().then(|| c.re.as_constant()).flatten();
            let coef = c.display(&names);
            parts.push(match (d.is_empty(), unit) {
                (true, _) => coef,
                (false, Some(v)) if v.is_one() => d.join("*"),
                (false, Some(v)) if (-&v).is_one() => format!("-{}", d.join("*")),
                (false, _) => {
                    let coef = if c.im.is_zero() && coef[1..].contains(' ') {
                        format!("({coef})")
                    } else {
                        coef
                    };
                    format!("{}*{}", coef, d.join("*"))
                }
            });
        }
        // a leading '-' belongs to a single unparenthesized term or a bare polynomial
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }
}

/// `t^e` on ℝᵏ in variable `i`.
pub fn t_pow(k: usize, i: usize, e: u32) -> Polynomial {
    let mut m = Monomial::one(k);
    m.0[i] = e;
    Polynomial::term(k, m, Q::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t() -> DiffOp {
        DiffOp::multiplication(CPoly::real(t_pow(1, 0, 1)))
    }

    fn dt() -> DiffOp {
        DiffOp::partial(1, 0)
    }

    #[test]
    fn canonical_commutator() {
        assert_eq!(dt().commutator(&t()).unwrap(), DiffOp::identity(1));
        let d2 = dt().pow(2);
        assert_eq!(d2.compose(&DiffOp::identity(1)).unwrap(), d2);
    }

    #[test]
    fn squared_oscillator_expansion() {
        // (d² − t²)² = d⁴ − 2t²d² − 4t·d − 2 + t⁴
        let h = dt().pow(2).sub(&t().pow(2)).unwrap();
        let sq = h.compose(&h).unwrap();
        let mut expect = dt().pow(4);
        expect.add_term(vec![2], CPoly::real(t_pow(1, 0, 2).scale(&q(-2))));
        expect.add_term(vec![1], CPoly::real(t_pow(1, 0, 1).scale(&q(-4))));
        expect.add_term(vec![0], CPoly::real(t_pow(1, 0, 4).add(&Polynomial::constant(1, q(-2)))));
        assert_eq!(sq, expect);
    }

    #[test]
    fn adjoints() {
        assert_eq!(dt().adjoint(), dt().neg());
        let it = DiffOp::multiplication(CPoly::imag(t_pow(1, 0, 1)));
        assert_eq!(it.adjoint(), it.neg());
        let h = dt().pow(2).sub(&t().pow(2)).unwrap().pow(2);
        assert_eq!(h.adjoint(), h);
    }

    #[test]
    fn display_forms() {
        assert_eq!(dt().display(), "d/dt");
        let it = DiffOp::multiplication(CPoly::imag(t_pow(1, 0, 2).scale(&q(3))));
        assert_eq!(it.display(), "i*3*t^2");
        assert_eq!(DiffOp::multiplication(CPoly::constant(1, q(0), q(1))).display(), "i");
        assert_eq!(DiffOp::zero(1).display(), "0");
        let quartic = dt().pow(4).neg().add(&DiffOp::multiplication(CPoly::real(t_pow(1, 0, 4).scale(&q(-1))))).unwrap();
        assert_eq!(quartic.display(), "-d^4/dt^4 - t^4");
    }

    fn arb_cpoly() -> impl Strategy<Value = CPoly> {
        prop::collection::vec((0u32..3, 0u32..3, -3i64..4, -3i64..4), 0..4).prop_map(|ts| {
            let mut c = CPoly::zero(2);
            for (a, b, re, im) in ts {
                let m = Monomial(vec![a, b]);
                c = c.add(&CPoly {
                    re: Polynomial::term(2, m.clone(), q(re)),
                    im: Polynomial::term(2, m, q(im)),
                });
            }
            c
        })
    }

    fn arb_op() -> impl Strategy<Value = DiffOp> {
        prop::collection::vec((0u32..3, 0u32..3, arb_cpoly()), 0..3).prop_map(|ts| {
            let mut op = DiffOp::zero(2);
            for (a, b, c) in ts {
                op.add_term(vec![a, b], c);
            }
            op
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn composition_is_associative(a in arb_op(), b in arb_op(), c in arb_op()) {
            let l = a.compose(&b).unwrap().compose(&c).unwrap();
            let r = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn composition_matches_application(a in arb_op(), b in arb_op(), f in arb_cpoly()) {
            let ab = a.compose(&b).unwrap();
            prop_assert_eq!(ab.apply(&f), a.apply(&b.apply(&f)));
        }

        #[test]
        fn adjoint_is_an_antihomomorphic_involution(a in arb_op(), b in arb_op()) {
            prop_assert_eq!(a.adjoint().adjoint(), a.clone());
            let ab = a.compose(&b).unwrap().adjoint();
            prop_assert_eq!(ab, b.adjoint().compose(&a.adjoint()).unwrap());
        }
    }
}
