//! Graded nilpotent Lie algebras over ℚ given by structure constants.
//!
//! Elements and covectors are coordinate vectors in the fixed basis and its
//! dual. The group law is the Baker–Campbell–Hausdorff product in the
//! convention `bch(a, b) = a + b − ½[a,b] + …`, i.e. `log(exp b · exp a)` in
//! the classical ordering.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{q, Q};
use crate::weight::{check_dilation, WeightVector};

pub type Element = Vec<Q>;
pub type Covector = Vec<Q>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotentAlgebra {
    weights: Vec<WeightVector>,
    /// `[eᵢ, eⱼ] = Σₖ table[(i,j)][k] eₖ` over ordered pairs; zero entries absent.
    table: BTreeMap<(usize, usize), BTreeMap<usize, Q>>,
}

/// An identity of the algebra that fails, with the offending basis indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ZeroWeight { i: usize },
    Antisymmetry { i: usize, j: usize, k: usize },
    Grading { i: usize, j: usize, k: usize },
    Jacobi { i: usize, j: usize, l: usize },
}

impl NilpotentAlgebra {
    pub fn abelian(weights: Vec<WeightVector>) -> Self {
        NilpotentAlgebra {
            weights,
            table: BTreeMap::new(),
        }
    }

    /// Builds from constants `[eᵢ,eⱼ] ∋ c·eₖ` given for `i < j`; the `j > i`
    /// half is filled antisymmetrically. Entries with `i ≥ j` are rejected.
    pub fn from_upper(
        weights: Vec<WeightVector>,
        constants: impl IntoIterator<Item = (usize, usize, usize, Q)>,
    ) -> Result<Self> {
        let dim = weights.len();
        let mut alg = Self::abelian(weights);
        for (i, j, k, c) in constants {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Invalid(alloc::format!(
                    "structure constant index ({i},{j},{k}) out of range for dim {dim}"
                )));
            }
            if i >= j {
                return Err(Error::Invalid(alloc::format!(
                    "structure constant ({i},{j},{k}) must have i < j"
                )));
            }
            alg.add_constant(i, j, k, c.clone());
            alg.add_constant(j, i, k, -c);
        }
        Ok(alg)
    }

    /// Builds from constants over ordered pairs exactly as given, without
    /// enforcing antisymmetry; use [`validate`](Self::validate) to inspect.
    pub fn from_raw(
        weights: Vec<WeightVector>,
        constants: impl IntoIterator<Item = (usize, usize, usize, Q)>,
    ) -> Self {
        let mut alg = Self::abelian(weights);
        for (i, j, k, c) in constants {
            alg.add_constant(i, j, k, c);
        }
        alg
    }

    fn add_constant(&mut self, i: usize, j: usize, k: usize, c: Q) {
        if c.is_zero() {
            return;
        }
        let row = self.table.entry((i, j)).or_default();
        let e = row.entry(k).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            row.remove(&k);
            if row.is_empty() {
                self.table.remove(&(i, j));
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn nu(&self) -> usize {
        self.weights.first().map_or(0, WeightVector::nu)
    }

    pub fn weights(&self) -> &[WeightVector] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> &WeightVector {
        &self.weights[i]
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> Q {
        self.table
            .get(&(i, j))
            .and_then(|r| r.get(&k))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// Nonzero constants `(i, j, k, c)` with `i < j`, in index order.
    pub fn upper_constants(&self) -> Vec<(usize, usize, usize, Q)> {
        let mut out = Vec::new();
        for (&(i, j), row) in &self.table {
            if i < j {
                for (&k, c) in row {
                    out.push((i, j, k, c.clone()));
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.table.is_empty()
    }

    pub fn basis_vector(&self, i: usize) -> Element {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    fn check(&self, v: &[Q]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn bracket(&self, a: &[Q], b: &[Q]) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.bracket_unchecked(a, b))
    }

    fn bracket_unchecked(&self, a: &[Q], b: &[Q]) -> Element {
        let mut out = vec![Q::zero(); self.dim()];
        for (&(i, j), row) in &self.table {
            if a[i].is_zero() || b[j].is_zero() {
                continue;
            }
            let f = &a[i] * &b[j];
            for (&k, c) in row {
                out[k] += &f * c;
            }
        }
        out
    }

    /// Float bracket for approximate elements.
    pub fn bracket_f64(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (&(i, j), row) in &self.table {
            let f = a[i] * b[j];
            if f == 0.0 {
                continue;
            }
            for (&k, c) in row {
                out[k] += f * crate::rational::to_f64(c);
            }
        }
        out
    }

    /// Matrix of `ad_a`, column `j` holding `[a, eⱼ]`.
    pub fn ad_matrix(&self, a: &[Q]) -> Result<QMatrix> {
        self.check(a)?;
        let n = self.dim();
        let mut m = QMatrix::zeros(n, n);
        for (&(i, j), row) in &self.table {
            if a[i].is_zero() {
                continue;
            }
            for (&k, c) in row {
                m[(k, j)] += &a[i] * c;
            }
        }
        Ok(m)
    }

    /// `exp(ad_a) = Σ ad_aᵐ/m!`, a finite sum by nilpotency.
    pub fn ad_exp(&self, a: &[Q]) -> Result<QMatrix> {
        let ad = self.ad_matrix(a)?;
        let n = self.dim();
        let mut out = QMatrix::identity(n);
        let mut term = QMatrix::identity(n);
        for m in 1..=n {
            term = ad.mul(&term);
            if term.is_zero() {
                break;
            }
            let inv = Q::one() / q(m as i64);
            for i in 0..n {
                for j in 0..n {
                    if !term[(i, j)].is_zero() {
                        term[(i, j)] *= &inv;
                        out[(i, j)] += &term[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Upper bound on the nilpotency step from the grading.
    pub fn step(&self) -> usize {
        let tot: Vec<u32> = self.weights.iter().map(WeightVector::total).collect();
        let max = tot.iter().copied().max().unwrap_or(0);
        let min = tot.iter().copied().filter(|&t| t > 0).min().unwrap_or(1);
        (max / min).max(1) as usize
    }

    /// Group product in exponential coordinates.
    pub fn bch(&self, a: &[Q], b: &[Q]) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.classical_bch(b, a))
    }

    /// `log(exp x · exp y)` via the Varadarajan recursion
    /// `(n+1)z_{n+1} = ½[x−y, zₙ] + Σₚ B₂ₚ/(2p)! Σ_{k₁+…+k₂ₚ=n} [z_{k₁},[…,[z_{k₂ₚ}, x+y]…]]`.
    fn classical_bch(&self, x: &[Q], y: &[Q]) -> Element {
        let n = self.dim();
        let step = self.step();
        let sum: Element = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let diff: Element = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let bern = bernoulli_factorial(step + 1);
        // z[m] is the homogeneous degree-m part, z[0] unused.
        let mut z: Vec<Element> = vec![vec![Q::zero(); n], sum.clone()];
        for m in 1..step {
            let mut next = self.bracket_unchecked(&diff, &z[m]);
            for v in next.iter_mut() {
                *v /= q(2);
            }
            let mut memo: BTreeMap<(usize, usize), Element> = BTreeMap::new();
            let mut p = 1;
            while 2 * p <= m {
                let k = &bern[2 * p];
                if !k.is_zero() {
                    let t = nested_sum(self, &z, &sum, 2 * p, m, &mut memo);
                    for (acc, v) in next.iter_mut().zip(&t) {
                        *acc += k * v;
                    }
                }
                p += 1;
            }
            let inv = Q::one() / q(m as i64 + 1);
            for v in next.iter_mut() {
                *v *= &inv;
            }
            z.push(next);
        }
        let mut out = vec![Q::zero(); n];
        for part in &z[1..] {
            for (acc, v) in out.iter_mut().zip(part) {
                *acc += v;
            }
        }
        out
    }

    /// Grade-wise scaling `α_λ`.
    pub fn dilate(&self, a: &[Q], lambda: &[Q]) -> Result<Element> {
        self.check(a)?;
        check_dilation(lambda)?;
        Ok(a.iter()
            .zip(&self.weights)
            .map(|(c, w)| c * w.power(lambda))
            .collect())
    }

    /// Dual dilation on covectors; grade-`k` coordinates scale by `λᵏ`.
    pub fn dual_dilate(&self, xi: &[Q], lambda: &[Q]) -> Result<Covector> {
        self.dilate(xi, lambda)
    }

    /// `Ad*(exp g) ξ = ξ ∘ exp(−ad_g)`.
    pub fn coadjoint(&self, g: &[Q], xi: &[Q]) -> Result<Covector> {
        self.check(xi)?;
        let neg: Element = g.iter().map(|c| -c.clone()).collect();
        let m = self.ad_exp(&neg)?;
        Ok(m.transpose().mul_vec(xi))
    }

    /// `Ad(exp g) a = exp(ad_g) a`.
    pub fn adjoint(&self, g: &[Q], a: &[Q]) -> Result<Element> {
        self.check(a)?;
        Ok(self.ad_exp(g)?.mul_vec(a))
    }

    /// Indices spanning the center (basis vectors central among basis vectors).
    pub fn center_basis(&self) -> Vec<Vec<Q>> {
        let n = self.dim();
        let mut rows = Vec::new();
        for i in 0..n {
            let ad = self.ad_matrix(&self.basis_vector(i)).expect("basis vector");
            for r in 0..n {
                rows.push(ad.row_vec(r));
            }
        }
        if rows.is_empty() {
            return (0..n).map(|i| self.basis_vector(i)).collect();
        }
        // z central iff [eᵢ, z] = 0 for all i.
        QMatrix::from_rows(&rows).nullspace()
    }

    /// Reports every failing identity: zero weights, antisymmetry,
    /// grading and the Jacobi identity on basis triples.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.dim();
        let mut out = Vec::new();
        for (i, w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                out.push(Violation::ZeroWeight { i });
            }
        }
        let mut antisym = alloc::collections::BTreeSet::new();
        for (&(i, j), row) in &self.table {
            for (&k, c) in row {
                if !(c + self.constant(j, i, k)).is_zero() {
                    antisym.insert((i.min(j), i.max(j), k));
                }
                let first = i < j || !self.table.contains_key(&(j, i));
                if first && self.weights[k] != self.weights[i].add(&self.weights[j]) {
                    out.push(Violation::Grading { i, j, k });
                }
            }
        }
        out.extend(antisym.into_iter().map(|(i, j, k)| Violation::Antisymmetry { i, j, k }));
        for i in 0..n {
            for j in (i + 1)..n {
                for l in (j + 1)..n {
                    let (a, b, c) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(l));
                    let t1 = self.bracket_unchecked(&a, &self.bracket_unchecked(&b, &c));
                    let t2 = self.bracket_unchecked(&b, &self.bracket_unchecked(&c, &a));
                    let t3 = self.bracket_unchecked(&c, &self.bracket_unchecked(&a, &b));
                    if t1.iter().zip(&t2).zip(&t3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        out.push(Violation::Jacobi { i, j, l });
                    }
                }
            }
        }
        out
    }

    /// Re-expresses the algebra in the basis given by the columns of `p`
    /// (old coordinates). Each new basis vector must be pure of the stated weight.
    pub fn change_basis(&self, p: &QMatrix, weights: Vec<WeightVector>) -> Result<Self> {
        let n = self.dim();
        if p.rows() != n || p.cols() != n || weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.cols(),
            });
        }
        let inv = p
            .inverse()
            .ok_or_else(|| Error::Invalid(alloc::string::String::from("basis change is singular")))?;
        let cols: Vec<Element> = (0..n).map(|j| p.column(j)).collect();
        let mut consts = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let br = inv.mul_vec(&self.bracket_unchecked(&cols[i], &cols[j]));
                for (k, c) in br.into_iter().enumerate() {
                    if !c.is_zero() {
                        consts.push((i, j, k, c));
                    }
                }
            }
        }
        Self::from_upper(weights, consts)
    }
}

/// `Σ_{k₁+…+k_m = s} [z_{k₁},[…,[z_{k_m}, base]…]]`, memoized on `(m, s)`.
fn nested_sum(
    alg: &NilpotentAlgebra,
    z: &[Element],
    base: &Element,
    m: usize,
    s: usize,
    memo: &mut BTreeMap<(usize, usize), Element>,
) -> Element {
    if m == 0 {
        return if s == 0 {
            base.clone()
        } else {
            vec![Q::zero(); alg.dim()]
        };
    }
    if let Some(v) = memo.get(&(m, s)) {
        return v.clone();
    }
    let mut acc = vec![Q::zero(); alg.dim()];
    if s >= m {
        for k in 1..=(s - (m - 1)) {
            let inner = nested_sum(alg, z, base, m - 1, s - k, memo);
            let br = alg.bracket_unchecked(&z[k], &inner);
            for (a, v) in acc.iter_mut().zip(&br) {
                *a += v;
            }
        }
    }
    memo.insert((m, s), acc.clone());
    acc
}

/// `Bₘ/m!` for `m = 0..=n` (with `B₁ = −½`).
fn bernoulli_factorial(n: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![Q::one()];
    for m in 1..=n {
        // B_m = −1/(m+1) Σ_{k<m} C(m+1,k) B_k
        let mut acc = Q::zero();
        let mut binom = Q::one();
        for (k, bk) in b.iter().enumerate() {
            acc += &binom * bk;
            binom = binom * q((m + 1 - k) as i64) / q(k as i64 + 1);
        }
        b.push(-acc / q(m as i64 + 1));
    }
    let mut fact = Q::one();
    b.into_iter()
        .enumerate()
        .map(|(m, v)| {
            if m > 0 {
                fact *= q(m as i64);
            }
            v / &fact
        })
        .collect()
}

/// The Heisenberg algebra `[X, Y] = Z` with weights 1, 1, 2.
pub fn heisenberg() -> NilpotentAlgebra {
    use alloc::vec;
    NilpotentAlgebra::from_upper(
        vec![
            WeightVector(vec![1]),
            WeightVector(vec![1]),
            WeightVector(vec![2]),
        ],
        [(0, 1, 2, Q::one())],
    )
    .expect("valid constants")
}
