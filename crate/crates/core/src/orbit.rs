//! Orbit method: the form `B_ξ(v, w) = ξ([v, w])`, Vergne polarizations and
//! the induced representation realized on functions of `t ∈ ℝᵏ`.
//!
//! The representation acts on `f(h·g) = e^{iξ(log h)} f(g)` (`h ∈ exp 𝔥`) by
//! right translation, with `g(t) = exp(t₁w₁)⋯exp(t_k w_k)` over a weak Malcev
//! transversal. Differentiating `g(t)·exp(sV) = h(s)·g(t(s))` at `s = 0` gives
//! `Ad_{g(t)}V = H′ + Σⱼ ṫⱼ Rⱼ(t)` with `Rⱼ = Ad_{exp(t₁w₁)⋯exp(tⱼ₋₁wⱼ₋₁)} wⱼ`,
//! so `dπ(V) = Σⱼ ṫⱼ ∂ⱼ + iξ(H′)`. The linear system is unipotent relative to
//! the flag, so its inverse is a finite Neumann series with polynomial entries.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::diffop::{CPoly, DiffOp};
use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::linalg::{dot, QMatrix};
use crate::nilpotent::{Covector, Element, NilpotentAlgebra};
use crate::poly::Polynomial;
use crate::rational::{q, Q};

/// `B[v][w] = ξ([e_v, e_w])`.
pub fn bilinear_form(a: &NilpotentAlgebra, xi: &[Q]) -> Result<QMatrix> {
    check_len(a, xi)?;
    let n = a.dim();
    let mut b = QMatrix::zeros(n, n);
    for (i, j, k, c) in a.upper_constants() {
        let v = &c * &xi[k];
        b[(j, i)] -= &v;
        b[(i, j)] += v;
    }
    Ok(b)
}

fn check_len(a: &NilpotentAlgebra, v: &[Q]) -> Result<()> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// Basis indices by non-increasing total weight, ties by decreasing index.
/// Every prefix spans an ideal since brackets strictly raise total weight.
pub fn default_flag(a: &NilpotentAlgebra) -> Vec<Vec<Q>> {
    let mut idx: Vec<usize> = (0..a.dim()).collect();
    idx.sort_by(|&i, &j| a.weight(j).total().cmp(&a.weight(i).total()).then(j.cmp(&i)));
    idx.into_iter().map(|i| a.basis_vector(i)).collect()
}

/// Checks that the vectors form a basis whose prefixes span ideals.
pub fn check_ideal_flag(a: &NilpotentAlgebra, flag: &[Vec<Q>]) -> Result<()> {
    let n = a.dim();
    if flag.len() != n || flag.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidFlag(alloc::format!("a flag needs {n} vectors of length {n}")));
    }
    if QMatrix::from_rows(flag).rank() != n {
        return Err(Error::InvalidFlag("flag vectors are dependent".into()));
    }
    for i in 1..=n {
        let prefix = QMatrix::from_columns(n, &flag[..i]);
        for j in 0..n {
            for v in &flag[..i] {
                let br = a.bracket(&a.basis_vector(j), v)?;
                if prefix.solve(&br).is_none() {
                    return Err(Error::InvalidFlag(alloc::format!("prefix {i} is not an ideal")));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Polarization {
    /// Exact subalgebra `𝔥` with `B_ξ(𝔥, 𝔥) = 0` and `codim 𝔥 = rank B_ξ / 2`.
    pub subalgebra: Subspace,
    pub xi: Covector,
    pub flag: Vec<Vec<Q>>,
}

/// `𝔥 = Σᵢ ker(B_ξ|𝔤ᵢ)` over the flag `𝔤ᵢ = span(flag[..i])`, the default
/// flag when `None`.
pub fn vergne_polarization(a: &NilpotentAlgebra, xi: &[Q], flag: Option<&[Vec<Q>]>) -> Result<Polarization> {
    check_len(a, xi)?;
    let flag = match flag {
        Some(f) => {
            check_ideal_flag(a, f)?;
            f.to_vec()
        }
        None => default_flag(a),
    };
    let n = a.dim();
    let b = bilinear_form(a, xi)?;
    let mut vectors: Vec<Vec<Q>> = Vec::new();
    for i in 1..=n {
        let f = QMatrix::from_columns(n, &flag[..i]);
        let bi = f.transpose().mul(&b).mul(&f);
        for c in bi.nullspace() {
            vectors.push(f.mul_vec(&c));
        }
    }
    let pol = Polarization {
        subalgebra: Subspace::exact_span(n, &vectors),
        xi: xi.to_vec(),
        flag,
    };
    verify_polarization(a, &pol, &b)?;
    Ok(pol)
}

fn verify_polarization(a: &NilpotentAlgebra, pol: &Polarization, b: &QMatrix) -> Result<()> {
    let h = pol.subalgebra.exact_basis().expect("exact");
    let span = QMatrix::from_columns(a.dim(), h);
    for u in h {
        for v in h {
            if !dot(u, &b.mul_vec(v)).is_zero() {
                return Err(Error::Invalid("B_xi does not vanish on the polarization".into()));
            }
            if span.cols() > 0 && span.solve(&a.bracket(u, v)?).is_none() {
                return Err(Error::Invalid("polarization is not a subalgebra".into()));
            }
        }
    }
    if 2 * (a.dim() - h.len()) != b.rank() {
        return Err(Error::Invalid("polarization has the wrong dimension".into()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Representation {
    pub k: usize,
    /// Transversal `w₁, …, w_k` in flag order.
    pub malcev: Vec<Element>,
    /// `dπ(eᵢ)` for each basis vector.
    pub dpi: Vec<DiffOp>,
    pub xi: Covector,
    pub polarization: Polarization,
    /// `λ` of [`rep_dilate`], if applied.
    pub dilation: Option<Vec<Q>>,
}

impl Representation {
    /// `dπ(v)` for algebra coordinates `v`.
    pub fn apply(&self, v: &[Q]) -> DiffOp {
        let mut out = DiffOp::zero(self.k);
        for (c, d) in v.iter().zip(&self.dpi) {
            if !c.is_zero() {
                out = out.add(&d.scale(c)).expect("same k");
            }
        }
        out
    }

    /// `(order, degree)` of each `dπ(eᵢ)`.
    pub fn shape(&self) -> Vec<(u32, u32)> {
        self.dpi.iter().map(|d| (d.order(), d.degree())).collect()
    }
}

type PolyVec = Vec<Polynomial>;

fn const_vec(k: usize, v: &[Q]) -> PolyVec {
    v.iter().map(|c| Polynomial::constant(k, c.clone())).collect()
}

fn mat_apply(m: &QMatrix, v: &PolyVec, k: usize) -> PolyVec {
    (0..m.rows())
        .map(|r| {
            (0..m.cols()).fold(Polynomial::zero(k), |acc, c| {
                if m[(r, c)].is_zero() || v[c].is_zero() {
                    acc
                } else {
                    acc.add(&v[c].scale(&m[(r, c)]))
                }
            })
        })
        .collect()
}

/// `Ad_{exp(tᵢ w)} v = Σ_m tᵢ^m/m! ad_w^m v`.
fn ad_exp_poly(ad: &QMatrix, i: usize, v: &PolyVec, k: usize) -> PolyVec {
    let ti = Polynomial::var(k, i);
    let mut out = v.clone();
    let mut term = v.clone();
    for m in 1..=v.len() {
        term = mat_apply(ad, &term, k)
            .into_iter()
            .map(|p| p.mul(&ti).scale(&(Q::one() / q(m as i64))))
            .collect();
        if term.iter().all(Polynomial::is_zero) {
            break;
        }
        out = out.iter().zip(&term).map(|(a, b)| a.add(b)).collect();
    }
    out
}

/// Transversal: flag vectors outside `𝔥 + span(earlier flag vectors)`.
fn malcev_transversal(pol: &Polarization) -> Vec<Element> {
    let mut span: Vec<Vec<Q>> = pol.subalgebra.exact_basis().expect("exact").to_vec();
    let mut out = Vec::new();
    for f in &pol.flag {
        let rank = QMatrix::from_rows(&span).rank();
        span.push(f.clone());
        if QMatrix::from_rows(&span).rank() > rank {
            out.push(f.clone());
        } else {
            span.pop();
        }
    }
    out
}

/// The representation induced from the character `e^{iξ}` of `exp 𝔥`.
pub fn induced_rep(a: &NilpotentAlgebra, pol: &Polarization) -> Result<Representation> {
    let n = a.dim();
    let h = pol.subalgebra.exact_basis().expect("exact").to_vec();
    let w = malcev_transversal(pol);
    let k = w.len();
    let ads = w.iter().map(|v| a.ad_matrix(v)).collect::<Result<Vec<_>>>()?;
    let ad_g = |v: PolyVec, upto: usize| (0..upto).rev().fold(v, |acc, i| ad_exp_poly(&ads[i], i, &acc, k));

    let cols: Vec<Vec<Q>> = h.iter().chain(&w).cloned().collect();
    let m0inv = QMatrix::from_columns(n, &cols)
        .inverse()
        .expect("transversal complements the polarization");
    // columns of N = M₀⁻¹(M(t) − M₀); only transversal columns are nonzero
    let ncols: Vec<PolyVec> = w
        .iter()
        .enumerate()
        .map(|(j, wj)| {
            let rj = ad_g(const_vec(k, wj), j);
            let diff: PolyVec = rj.iter().zip(wj).map(|(p, c)| p.sub(&Polynomial::constant(k, c.clone()))).collect();
            mat_apply(&m0inv, &diff, k)
        })
        .collect();
    let hlen = h.len();
    let solve = |u: PolyVec| -> PolyVec {
        let mut z = mat_apply(&m0inv, &u, k);
        let mut acc = z.clone();
        for _ in 0..n {
            let mut next = vec![Polynomial::zero(k); n];
            for (j, col) in ncols.iter().enumerate() {
                let zj = &z[hlen + j];
                if zj.is_zero() {
                    continue;
                }
                for (r, c) in col.iter().enumerate() {
                    next[r] = next[r].sub(&c.mul(zj));
                }
            }
            if next.iter().all(Polynomial::is_zero) {
                break;
            }
            acc = acc.iter().zip(&next).map(|(x, y)| x.add(y)).collect();
            z = next;
        }
        acc
    };

    let xi_h: Vec<Q> = h.iter().map(|v| dot(v, &pol.xi)).collect();
    let mut dpi = Vec::with_capacity(n);
    for e in 0..n {
        let u = ad_g(const_vec(k, &a.basis_vector(e)), k);
        let coords = solve(u);
        let mut op = DiffOp::zero(k);
        for j in 0..k {
            let mut alpha = vec![0; k];
            alpha[j] = 1;
            op.add_term(alpha, CPoly::real(coords[hlen + j].clone()));
        }
        let phase = xi_h
            .iter()
            .zip(&coords)
            .fold(Polynomial::zero(k), |acc, (x, c)| if x.is_zero() { acc } else { acc.add(&c.scale(x)) });
        op.add_term(vec![0; k], CPoly::imag(phase));
        dpi.push(op);
    }
    Ok(Representation {
        k,
        malcev: w,
        dpi,
        xi: pol.xi.clone(),
        polarization: pol.clone(),
        dilation: None,
    })
}

/// Vergne polarization for the default flag, then the induced representation.
pub fn rep_of_covector(a: &NilpotentAlgebra, eta: &[Q]) -> Result<Representation> {
    let pol = vergne_polarization(a, eta, None)?;
    induced_rep(a, &pol)
}

/// `dπ′(X) = dπ(α_λ X)`, i.e. `dπ′(eᵢ) = λ^{ω(i)} dπ(eᵢ)`.
pub fn rep_dilate(a: &NilpotentAlgebra, r: &Representation, lambda: &[Q]) -> Result<Representation> {
    crate::weight::check_dilation(lambda)?;
    if lambda.len() != a.nu() {
        return Err(Error::Arity {
            expected: a.nu(),
            found: lambda.len(),
        });
    }
    let mut out = r.clone();
    for (i, d) in out.dpi.iter_mut().enumerate() {
        *d = d.scale(&a.weight(i).power(lambda));
    }
    out.dilation = Some(lambda.to_vec());
    Ok(out)
}

/// Basis pairs `(i, j)` with `dπ([eᵢ, eⱼ]) ≠ [dπ(eᵢ), dπ(eⱼ)]`.
pub fn homomorphism_defects(a: &NilpotentAlgebra, r: &Representation) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..a.dim() {
        for j in (i + 1)..a.dim() {
            let br = a.bracket(&a.basis_vector(i), &a.basis_vector(j)).expect("basis");
            let lhs = r.apply(&br);
            let rhs = r.dpi[i].commutator(&r.dpi[j]).expect("same k");
            if lhs != rhs {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::t_pow;
    use crate::example::example_osculating;
    use crate::freelie::random_graded_algebra;
    use crate::nilpotent::heisenberg;
    use crate::rational::q;
    use proptest::prelude::*;

    fn i_times(p: Polynomial) -> DiffOp {
        DiffOp::multiplication(CPoly::imag(p))
    }

    #[test]
    fn heisenberg_form_and_rep() {
        let a = heisenberg();
        let xi = vec![q(0), q(0), q(1)];
        let b = bilinear_form(&a, &xi).unwrap();
        assert_eq!(b[(0, 1)], q(1));
        assert_eq!(b[(1, 0)], q(-1));
        assert_eq!(b.nullspace(), vec![vec![q(0), q(0), q(1)]]);
        let pol = vergne_polarization(&a, &xi, None).unwrap();
        let hb = QMatrix::from_columns(3, pol.subalgebra.exact_basis().unwrap());
        assert!(hb.solve(&[q(0), q(1), q(0)]).is_some() && hb.cols() == 2);
        let r = induced_rep(&a, &pol).unwrap();
        assert_eq!(r.k, 1);
        assert_eq!(r.dpi[0], DiffOp::partial(1, 0));
        assert_eq!(r.dpi[1], i_times(t_pow(1, 0, 1)));
        assert_eq!(r.dpi[2], i_times(Polynomial::one(1)));
    }

    #[test]
    fn zero_and_abelian_covectors_give_characters() {
        let a = heisenberg();
        let r = rep_of_covector(&a, &[q(0), q(0), q(0)]).unwrap();
        assert_eq!(r.k, 0);
        assert!(r.dpi.iter().all(DiffOp::is_zero));
        let r = rep_of_covector(&a, &[q(2), q(-1), q(0)]).unwrap();
        assert_eq!(r.k, 0);
        assert_eq!(r.dpi[0].as_scalar(), Some((q(0), q(2))));
    }

    #[test]
    fn example_third_family() {
        for n in 2..=3u32 {
            let osc = example_osculating(n, &[q(0), q(0)], n + 3).unwrap();
            let a = osc.algebra();
            let (eta, b) = (q(3), q(-2));
            let mut xi = vec![q(0); a.dim()];
            xi[1] = eta.clone();
            xi[a.dim() - 1] = b.clone();
            let r = rep_of_covector(a, &xi).unwrap();
            assert_eq!(r.k, 1);
            assert!(r.dpi[0].is_zero());
            assert_eq!(r.dpi[1].as_scalar(), Some((q(0), eta.clone())));
            assert_eq!(r.dpi[2], DiffOp::partial(1, 0));
            for j in 1..=n {
                let expect = i_times(t_pow(1, 0, n - j).scale(&b));
                assert_eq!(r.dpi[2 + j as usize], expect, "Z{j}");
            }
            assert!(homomorphism_defects(a, &r).is_empty());
        }
    }

    #[test]
    fn invalid_flag_is_rejected() {
        let a = heisenberg();
        let flag: Vec<Vec<Q>> = (0..3).map(|i| a.basis_vector(i)).collect();
        assert!(matches!(
            vergne_polarization(&a, &[q(0), q(0), q(1)], Some(&flag)),
            Err(Error::InvalidFlag(_))
        ));
    }

    #[test]
    fn dilation_scales_by_weight() {
        let osc = example_osculating(3, &[q(0), q(0)], 6).unwrap();
        let a = osc.algebra();
        let mut xi = vec![q(0); a.dim()];
        xi[1] = q(1);
        xi[a.dim() - 1] = q(1);
        let r = rep_of_covector(a, &xi).unwrap();
        let mu = q(3);
        let d = rep_dilate(a, &r, &[q(1), mu.clone()]).unwrap();
        for j in 1..=3u32 {
            let i = 2 + j as usize;
            assert_eq!(d.dpi[i], r.dpi[i].scale(&crate::rational::pow_u(&mu, j)));
        }
        assert_eq!(d.dpi[1], r.dpi[1]);
        assert!(homomorphism_defects(a, &d).is_empty());
    }

    #[test]
    fn random_algebras_reach_two_variables() {
        let mut max_k = 0;
        for seed in 0..20 {
            let a = random_graded_algebra(seed);
            let xi: Vec<Q> = (0..a.dim()).map(|i| q(i as i64 % 3 - 1)).collect();
            let r = rep_of_covector(&a, &xi).unwrap();
            assert!(homomorphism_defects(&a, &r).is_empty(), "seed {seed}");
            max_k = max_k.max(r.k);
        }
        assert!(max_k >= 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_reps_are_skew_homomorphisms(seed in 0u64..1000, coeffs in prop::collection::vec(-3i64..4, 14)) {
            let a = random_graded_algebra(seed);
            let xi: Vec<Q> = coeffs[..a.dim()].iter().map(|&c| q(c)).collect();
            let r = rep_of_covector(&a, &xi).unwrap();
            prop_assert_eq!(2 * r.k, bilinear_form(&a, &xi).unwrap().rank());
            prop_assert!(homomorphism_defects(&a, &r).is_empty());
            for d in &r.dpi {
                prop_assert_eq!(d.adjoint(), d.neg());
            }
        }
    }
}
