//! One-variable symbol operators in the Hermite-function basis: matrices,
//! low eigenvalues, injectivity margins and parameter scans.
//!
//! With ladder operators `a|n⟩ = √n|n−1⟩`, `t = (a + a†)/√2` and
//! `d/dt = (a − a†)/√2`. Each column `A|n⟩` is computed on `M + pad` modes,
//! `pad = degree + order + 2`, so the retained `M × M` block is exact.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, ComplexField, DMatrix};
use num_traits::Zero;

use crate::diffop::{CPoly, DiffOp};
use crate::error::{Error, Result};
use crate::orbit::Representation;
use crate::osculating::OsculatingAlgebra;
use crate::poly::{Monomial, Polynomial};
use crate::rational::{to_f64, Q};
use crate::symbol::{principal_symbol, WeightedOperator};

pub type C64 = Complex<f64>;

pub const DEFAULT_M: usize = 256;
pub const DEFAULT_MARGIN: f64 = 1e-6;
/// Relative agreement between truncations `M` and `2M` for a stable eigenvalue.
pub const STABLE_REL_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct HermiteMatrix {
    pub m: usize,
    pub entries: DMatrix<C64>,
    pub source: DiffOp,
}

impl HermiteMatrix {
    /// `‖A − A†‖∞ < 1e-10` relative to the largest entry.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.entries.iter().fold(1.0f64, |m, z| m.max(z.modulus()));
        let n = self.m;
        (0..n).all(|i| (0..n).all(|j| (self.entries[(i, j)] - self.entries[(j, i)].conj()).modulus() <= HERMITIAN_TOL * scale))
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }
}

fn apply_t(v: &[C64]) -> Vec<C64> {
    let p = v.len();
    let mut out = vec![C64::zero(); p];
    for n in 0..p {
        if v[n] == C64::zero() {
            continue;
        }
        if n > 0 {
            out[n - 1] += v[n] * libm::sqrt(n as f64 / 2.0);
        }
        if n + 1 < p {
            out[n + 1] += v[n] * libm::sqrt((n + 1) as f64 / 2.0);
        }
    }
    out
}

fn apply_d(v: &[C64]) -> Vec<C64> {
    let p = v.len();
    let mut out = vec![C64::zero(); p];
    for n in 0..p {
        if v[n] == C64::zero() {
            continue;
        }
        if n > 0 {
            out[n - 1] += v[n] * libm::sqrt(n as f64 / 2.0);
        }
        if n + 1 < p {
            out[n + 1] -= v[n] * libm::sqrt((n + 1) as f64 / 2.0);
        }
    }
    out
}

/// `c(t)·v` by Horner's rule on the coefficient list.
fn apply_poly(c: &CPoly, v: &[C64]) -> Vec<C64> {
    let deg = c.re.degree().max(c.im.degree());
    let coef = |j: u32| {
        let m = Monomial(vec![j]);
        C64::new(to_f64(&c.re.coeff(&m)), to_f64(&c.im.coeff(&m)))
    };
    let mut acc: Vec<C64> = v.iter().map(|x| x * coef(deg)).collect();
    for j in (0..deg).rev() {
        acc = apply_t(&acc);
        let cj = coef(j);
        if cj != C64::zero() {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x * cj;
            }
        }
    }
    acc
}

fn check_k1(a: &DiffOp) -> Result<()> {
    if a.k() != 1 {
        return Err(Error::Arity {
            expected: 1,
            found: a.k(),
        });
    }
    Ok(())
}

/// `M × M` block of `A` in the Hermite-function basis.
pub fn hermite_matrix(a: &DiffOp, m: usize) -> Result<HermiteMatrix> {
    check_k1(a)?;
    let pad = (a.degree() + a.order() + 2) as usize;
    let p = m + pad;
    let mut entries = DMatrix::<C64>::zeros(m, m);
    for n in 0..m {
        let mut e = vec![C64::zero(); p];
        e[n] = C64::new(1.0, 0.0);
        let mut col = vec![C64::zero(); p];
        for (alpha, c) in a.terms() {
            let mut v = e.clone();
            for _ in 0..alpha[0] {
                v = apply_d(&v);
            }
            for (o, x) in col.iter_mut().zip(apply_poly(c, &v)) {
                *o += x;
            }
        }
        for i in 0..m {
            entries[(i, n)] = col[i];
        }
    }
    Ok(HermiteMatrix {
        m,
        entries,
        source: a.clone(),
    })
}

/// Eigenvalues of a definite Hermitian matrix as `±σ(L)²` for its Cholesky
/// factor `L`. Hermite matrices of high-degree symbols are strongly graded,
/// and the factor keeps the low eigenvalues to relative accuracy where a
/// dense symmetric solver loses them to `ε‖A‖`.
fn definite_eigenvalues(a: &DMatrix<C64>) -> Option<Vec<C64>> {
    for sign in [1.0, -1.0] {
        let m = if h_is_real(a) {
            let re = a.map(|z| sign * z.re);
            nalgebra::Cholesky::new(re).map(|c| c.l().singular_values().iter().map(|s| C64::new(sign * s * s, 0.0)).collect())
        } else {
            nalgebra::Cholesky::new(a.map(|z| z * sign))
                .map(|c| c.l().singular_values().iter().map(|s| C64::new(sign * s * s, 0.0)).collect())
        };
        if m.is_some() {
            return m;
        }
    }
    None
}

fn h_is_real(a: &DMatrix<C64>) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

/// All eigenvalues, real-symmetric and Hermitian cases by symmetric solvers.
pub fn all_eigenvalues(h: &HermiteMatrix) -> Result<Vec<C64>> {
    if h.m == 0 {
        return Ok(Vec::new());
    }
    if h.is_hermitian() {
        if let Some(ev) = definite_eigenvalues(&h.entries) {
            return Ok(ev);
        }
        if h.is_real() {
            let re = h.entries.map(|z| z.re);
            let eig = nalgebra::SymmetricEigen::try_new(re, 1e-14, 0)
                .ok_or_else(|| Error::Invalid(String::from("eigensolver did not converge")))?;
            return Ok(eig.eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect());
        }
        let eig = nalgebra::SymmetricEigen::try_new(h.entries.clone(), 1e-14, 0)
            .ok_or_else(|| Error::Invalid(String::from("eigensolver did not converge")))?;
        return Ok(eig.eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect());
    }
    let schur = nalgebra::Schur::try_new(h.entries.clone(), 1e-14, 0)
        .ok_or_else(|| Error::Invalid(String::from("eigensolver did not converge")))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::Invalid(String::from("complex Schur form is not triangular")))?;
    Ok(ev.iter().copied().collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen {
    pub value: C64,
    /// Agrees with the `2M` truncation to relative tolerance [`STABLE_REL_TOL`].
    pub stable: bool,
}

fn lowest(mut ev: Vec<C64>, count: usize) -> Vec<C64> {
    ev.sort_by(|a, b| a.modulus().total_cmp(&b.modulus()).then(a.re.total_cmp(&b.re)));
    ev.truncate(count);
    ev
}

/// The `count` eigenvalues of least modulus, checked against truncation `2M`.
pub fn eigenvalues(h: &HermiteMatrix, count: usize) -> Result<Vec<Eigen>> {
    if 4 * count > h.m {
        return Err(Error::Invalid(alloc::format!(
            "count {count} exceeds M/4 for M = {}",
            h.m
        )));
    }
    let small = lowest(all_eigenvalues(h)?, count);
    let big_m = hermite_matrix(&h.source, 2 * h.m)?;
    let big = all_eigenvalues(&big_m)?;
    Ok(stabilize(&small, &big))
}

fn stabilize(small: &[C64], big: &[C64]) -> Vec<Eigen> {
    small
        .iter()
        .map(|&l| {
            let near = big
                .iter()
                .copied()
                .min_by(|a, b| (a - l).modulus().total_cmp(&(b - l).modulus()))
                .unwrap_or(l);
            let tol = STABLE_REL_TOL * near.modulus().max(1e-4);
            Eigen {
                value: near,
                stable: (near - l).modulus() <= tol,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Injectivity {
    Injective,
    KernelDetected,
    Unstable,
}

impl Injectivity {
    pub fn name(self) -> &'static str {
        match self {
            Injectivity::Injective => "INJECTIVE",
            Injectivity::KernelDetected => "KERNEL_DETECTED",
            Injectivity::Unstable => "UNSTABLE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct InjectivityReport {
    pub verdict: Injectivity,
    /// Smallest singular value at `M`.
    pub sigma_m: f64,
    /// Smallest singular value at `2M`.
    pub sigma_2m: f64,
}

/// Smallest singular value of the truncation.
pub fn sigma_min(h: &HermiteMatrix) -> Result<f64> {
    if h.m == 0 {
        return Ok(0.0);
    }
    if h.is_hermitian() {
        return Ok(all_eigenvalues(h)?.iter().fold(f64::INFINITY, |m, z| m.min(z.modulus())));
    }
    let sv = h.entries.clone().singular_values();
    Ok(sv.min())
}

fn classify(s1: f64, s2: f64, margin: f64) -> Injectivity {
    if s1 < margin && s2 < margin && (s1 - s2).abs() < margin {
        Injectivity::KernelDetected
    } else if s1 > margin && s2 > margin {
        Injectivity::Injective
    } else {
        Injectivity::Unstable
    }
}

/// `σ_min` at `M` and `2M`: a kernel if both are below `margin`, injective
/// if both are above, unstable otherwise.
pub fn injectivity_test(a: &DiffOp, m: usize, margin: f64) -> Result<InjectivityReport> {
    let s1 = sigma_min(&hermite_matrix(a, m)?)?;
    let s2 = sigma_min(&hermite_matrix(a, 2 * m)?)?;
    Ok(InjectivityReport {
        verdict: classify(s1, s2, margin),
        sigma_m: s1,
        sigma_2m: s2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Scalar symbol, exactly nonzero.
    Nonzero,
    /// Scalar symbol, exactly zero.
    Zero,
    Injective,
    KernelDetected,
    Unstable,
    /// `k ≥ 2`: the symbol exists but is not analysed numerically.
    Unsupported,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Nonzero => "NONZERO",
            Verdict::Zero => "ZERO",
            Verdict::Injective => "INJECTIVE",
            Verdict::KernelDetected => "KERNEL_DETECTED",
            Verdict::Unstable => "UNSTABLE",
            Verdict::Unsupported => "UNSUPPORTED",
        }
    }

    pub fn is_obstruction(self) -> bool {
        matches!(self, Verdict::Zero | Verdict::KernelDetected)
    }

    pub fn is_inconclusive(self) -> bool {
        matches!(self, Verdict::Unstable | Verdict::Unsupported)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregate {
    Hypoelliptic,
    Obstructed,
    Inconclusive,
}

impl Aggregate {
    pub fn name(self) -> &'static str {
        match self {
            Aggregate::Hypoelliptic => "MAXIMALLY_HYPOELLIPTIC",
            Aggregate::Obstructed => "OBSTRUCTED",
            Aggregate::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralParams {
    pub m: usize,
    pub margin: f64,
    /// Eigenvalues reported per row.
    pub count: usize,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            m: DEFAULT_M,
            margin: DEFAULT_MARGIN,
            count: 6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub rep_id: String,
    pub param: Q,
    pub k: usize,
    pub m: usize,
    pub sigma_min: Option<f64>,
    pub verdict: Verdict,
    pub eigenvalues: Vec<Eigen>,
    pub symbol: DiffOp,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Per grid value, in grid order.
    pub per_param: Vec<(Q, Aggregate)>,
    pub obstructions: Vec<Q>,
    pub aggregate: Aggregate,
}

/// Splits `A = A′ + s·Id` with `s` the constant term of the zero-order coefficient.
fn split_scalar(a: &DiffOp) -> (DiffOp, C64) {
    let zero = vec![0u32; a.k()];
    let c = a.coefficient(&zero);
    let one = Monomial::one(a.k());
    let (re, im) = (c.re.coeff(&one), c.im.coeff(&one));
    let s = CPoly::constant(a.k(), re.clone(), im.clone());
    let mut rest = a.clone();
    rest.add_term(zero, s.neg());
    (rest, C64::new(to_f64(&re), to_f64(&im)))
}

/// Spectra reused across grid points whose symbols differ by a scalar.
/// Each entry keeps the non-scalar part, the scalar part of the first
/// operator seen and that operator's eigenvalues at `M` and `2M`.
#[derive(Default)]
pub struct SpectrumCache {
    entries: Vec<(DiffOp, C64, Vec<C64>, Vec<C64>, bool)>,
}

impl SpectrumCache {
    /// Eigenvalues at `M` and `2M` of `rest + s·Id` and its hermiticity.
    fn get(&mut self, rest: &DiffOp, s: C64, full: &DiffOp, m: usize) -> Result<(Vec<C64>, Vec<C64>, bool)> {
        let shift = |v: &[C64], d: C64| v.iter().map(|z| z + d).collect::<Vec<_>>();
        if let Some((_, s0, a, b, h)) = self.entries.iter().find(|e| &e.0 == rest) {
            return Ok((shift(a, s - s0), shift(b, s - s0), *h));
        }
        let h1 = hermite_matrix(full, m)?;
        let herm = h1.is_hermitian();
        let (a, b) = if herm {
            (all_eigenvalues(&h1)?, all_eigenvalues(&hermite_matrix(full, 2 * m)?)?)
        } else {
            (Vec::new(), Vec::new())
        };
        self.entries.push((rest.clone(), s, a.clone(), b.clone(), herm));
        Ok((a, b, herm))
    }
}

/// Verdict for one symbol. Hermitian cases read `σ_min` off a cached
/// spectrum, shifted by the change in scalar part (real in that case).
pub fn analyse_symbol(sym: &DiffOp, params: &SpectralParams, cache: &mut SpectrumCache) -> Result<(Verdict, Option<f64>, Vec<Eigen>)> {
    match sym.k() {
        0 => {
            let zero = sym.as_scalar().is_some_and(|(re, im)| re.is_zero() && im.is_zero());
            Ok((if zero { Verdict::Zero } else { Verdict::Nonzero }, None, Vec::new()))
        }
        1 => {
            let (rest, s) = split_scalar(sym);
            let (small, big, herm) = cache.get(&rest, s, sym, params.m)?;
            if herm && s.im == 0.0 {
                let s1 = small.iter().fold(f64::INFINITY, |m, z| m.min(z.modulus()));
                let s2 = big.iter().fold(f64::INFINITY, |m, z| m.min(z.modulus()));
                let ev = stabilize(&lowest(small, params.count), &big);
                let verdict = match classify(s1, s2, params.margin) {
                    Injectivity::Injective => Verdict::Injective,
                    Injectivity::KernelDetected => Verdict::KernelDetected,
                    Injectivity::Unstable => Verdict::Unstable,
                };
                return Ok((verdict, Some(s2), ev));
            }
            let r = injectivity_test(sym, params.m, params.margin)?;
            let verdict = match r.verdict {
                Injectivity::Injective => Verdict::Injective,
                Injectivity::KernelDetected => Verdict::KernelDetected,
                Injectivity::Unstable => Verdict::Unstable,
            };
            let h = hermite_matrix(sym, params.m)?;
            let ev = if 4 * params.count <= params.m {
                eigenvalues(&h, params.count)?
            } else {
                Vec::new()
            };
            Ok((verdict, Some(r.sigma_2m), ev))
        }
        _ => Ok((Verdict::Unsupported, None, Vec::new())),
    }
}

/// Symbols of `family(p)` under every representation for every grid value.
/// A grid value is obstructed if any representation shows a kernel, and
/// inconclusive if none does but some entry is unstable or unsupported.
pub fn rockland_scan<F>(
    family: F,
    reps: &[(String, Representation)],
    osc: &OsculatingAlgebra,
    grid: &[Q],
    params: &SpectralParams,
) -> Result<ScanReport>
where
    F: Fn(&Q) -> Result<WeightedOperator>,
{
    let mut caches: BTreeMap<usize, SpectrumCache> = BTreeMap::new();
    let mut rows = Vec::new();
    for p in grid {
        let op = family(p)?;
        for (ri, (id, rep)) in reps.iter().enumerate() {
            let sym = principal_symbol(&op, rep, osc)?;
            let (verdict, sigma, ev) = analyse_symbol(&sym, params, caches.entry(ri).or_default())?;
            rows.push(ScanRow {
                rep_id: id.clone(),
                param: p.clone(),
                k: rep.k,
                m: params.m,
                sigma_min: sigma,
                verdict,
                eigenvalues: ev,
                symbol: sym,
            });
        }
    }
    Ok(summarize(rows, grid))
}

/// Per-parameter and overall aggregates of scan rows.
pub fn summarize(rows: Vec<ScanRow>, grid: &[Q]) -> ScanReport {
    let mut per_param = Vec::new();
    let mut obstructions = Vec::new();
    for p in grid {
        let vs: Vec<Verdict> = rows.iter().filter(|r| &r.param == p).map(|r| r.verdict).collect();
        let agg = if vs.iter().any(|v| v.is_obstruction()) {
            obstructions.push(p.clone());
            Aggregate::Obstructed
        } else if vs.iter().any(|v| v.is_inconclusive()) {
            Aggregate::Inconclusive
        } else {
            Aggregate::Hypoelliptic
        };
        per_param.push((p.clone(), agg));
    }
    let aggregate = if per_param.iter().any(|(_, a)| *a == Aggregate::Inconclusive) {
        Aggregate::Inconclusive
    } else if !obstructions.is_empty() {
        Aggregate::Obstructed
    } else {
        Aggregate::Hypoelliptic
    };
    ScanReport {
        rows,
        per_param,
        obstructions,
        aggregate,
    }
}

/// `(d²/dt² − b²t^{2(N−1)})` on ℝ.
pub fn anharmonic(n: u32, b: &Q) -> DiffOp {
    let pot = Polynomial::term(1, Monomial(vec![2 * (n - 1)]), b * b);
    DiffOp::partial(1, 0)
        .pow(2)
        .sub(&DiffOp::multiplication(CPoly::real(pot)))
        .expect("k = 1")
}
