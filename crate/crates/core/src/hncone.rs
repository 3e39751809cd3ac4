//! Tangent cones at a point as limits of `ker ♮ₓₙ,ₜₙ`, and sampled
//! Helffer–Nourrigat cones.
//!
//! Sequences are driven by `τₙ = 2⁻ⁿ`: `tᵢ = cᵢ τ^{bᵢ}`, `xₙ = x + Σ c τ^e e_j`.
//! Kernels are computed exactly for each term and converted to floats only
//! for the Grassmannian limit. Sampling is a heuristic: it reports what the
//! chosen paths reach and never claims the cone set is complete.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grading::{natural_eval, GradedBasis};
use crate::grassmann::{annihilator_float, distance, kernel, limit, Limit, Subspace};
use crate::linalg::QMatrix;
use crate::osculating::OsculatingAlgebra;
use crate::rational::{fmt_q, q, qr, to_f64, Q};

/// Relative rank threshold when pushing a limit subspace through `♮ₓ,₀`.
pub const IMAGE_RANK_TOL: f64 = 1e-7;

/// One sampling sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingPath {
    /// `tᵢ = cᵢ τ^{bᵢ}`; a zero coefficient pins the axis at 0.
    pub t: Vec<(Q, u32)>,
    /// Point offsets `(j, c, e)`: `x_j += c τ^e`.
    pub x: Vec<(usize, Q, u32)>,
    /// Covector corrections `(j, d, e)`: `ξ_j += d τ^e` (directional sampling only).
    pub xi: Vec<(usize, Q, u32)>,
}

fn tau_pow(n: u32, e: u32) -> Q {
    Q::new(One::one(), num_bigint::BigInt::one() << ((n * e) as usize))
}

impl SamplingPath {
    /// `(xₙ, tₙ)` for term `n`.
    pub fn at(&self, x: &[Q], n: u32) -> (Vec<Q>, Vec<Q>) {
        let t = self.t.iter().map(|(c, b)| c * tau_pow(n, *b)).collect();
        let mut xn = x.to_vec();
        for (j, c, e) in &self.x {
            xn[*j] += c * tau_pow(n, *e);
        }
        (xn, t)
    }

    pub fn covector_at(&self, xi: &[Q], n: u32) -> Vec<Q> {
        let mut out = xi.to_vec();
        for (j, d, e) in &self.xi {
            out[*j] += d * tau_pow(n, *e);
        }
        out
    }

    /// Stable textual key, e.g. `t=(1τ^1,2τ^2) x0+=1τ^1`.
    pub fn key(&self) -> String {
        let mut s = String::from("t=(");
        for (i, (c, b)) in self.t.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}τ^{}", fmt_q(c), b);
        }
        s.push(')');
        for (j, c, e) in &self.x {
            let _ = write!(s, " x{}+={}τ^{}", j, fmt_q(c), e);
        }
        for (j, d, e) in &self.xi {
            let _ = write!(s, " ξ{}+={}τ^{}", j, fmt_q(d), e);
        }
        s
    }

    /// Exponents and coefficients flattened as floats: `b₁, c₁, …, b_ν, c_ν`.
    pub fn ratios(&self) -> Vec<f64> {
        self.t
            .iter()
            .flat_map(|(c, b)| [*b as f64, to_f64(c)])
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum Strategy {
    /// All exponent tuples in `1..=max_exponent` (with gcd 1) times all
    /// coefficient tuples, each with a fixed point or one coordinate offset
    /// `μ τ^e` for `μ ∈ x_scales`.
    Rays {
        max_exponent: u32,
        coefficients: Vec<Q>,
        x_scales: Vec<Q>,
    },
    /// Seeded random exponents, coefficients, point offsets and covector corrections.
    Random {
        seed: u64,
        paths: usize,
        max_exponent: u32,
    },
    Explicit(Vec<SamplingPath>),
}

impl Strategy {
    /// Rays with exponents up to `max Nᵢ + 1`, coefficients `{1/2, 1, 2}` and offsets `±1`.
    pub fn default_rays(depth_max: u32) -> Self {
        Strategy::Rays {
            max_exponent: depth_max + 1,
            coefficients: vec![qr(1, 2), q(1), q(2)],
            x_scales: vec![q(-1), q(1)],
        }
    }

    pub fn paths(&self, nu: usize, n_vars: usize) -> Vec<SamplingPath> {
        match self {
            Strategy::Explicit(p) => p.clone(),
            Strategy::Rays {
                max_exponent,
                coefficients,
                x_scales,
            } => rays(nu, n_vars, *max_exponent, coefficients, x_scales),
            Strategy::Random {
                seed,
                paths,
                max_exponent,
            } => random_paths(nu, n_vars, *seed, *paths, *max_exponent),
        }
    }
}

fn tuples(len: usize, choices: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for t in &out {
            for c in 0..choices {
                let mut u = t.clone();
                u.push(c);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn rays(nu: usize, n_vars: usize, max_e: u32, coeffs: &[Q], x_scales: &[Q]) -> Vec<SamplingPath> {
    let mut out = Vec::new();
    let exps = tuples(nu, max_e as usize);
    let cs = tuples(nu, coeffs.len());
    let mut offsets: Vec<Option<(usize, Q, u32)>> = vec![None];
    for j in 0..n_vars {
        for m in x_scales {
            for e in 1..=max_e {
                offsets.push(Some((j, m.clone(), e)));
            }
        }
    }
    for b in &exps {
        let b: Vec<u32> = b.iter().map(|&i| i as u32 + 1).collect();
        for off in &offsets {
            let g = b.iter().fold(off.as_ref().map_or(0, |o| o.2), |g, &e| gcd(g, e));
            if g > 1 {
                continue;
            }
            for c in &cs {
                out.push(SamplingPath {
                    t: c.iter().zip(&b).map(|(&ci, &bi)| (coeffs[ci].clone(), bi)).collect(),
                    x: off.iter().cloned().collect(),
                    xi: Vec::new(),
                });
            }
        }
    }
    out
}

fn random_paths(nu: usize, n_vars: usize, seed: u64, count: usize, max_e: u32) -> Vec<SamplingPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |m: u32| rng.next_u32() % m;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let t = (0..nu)
            .map(|_| (qr(pick(8) as i64 + 1, pick(8) as i64 + 1), pick(max_e) + 1))
            .collect();
        let mut x = Vec::new();
        if pick(2) == 1 {
            let sign = if pick(2) == 1 { 1 } else { -1 };
            x.push((
                pick(n_vars as u32) as usize,
                qr(sign * (pick(4) as i64 + 1), pick(4) as i64 + 1),
                pick(max_e) + 1,
            ));
        }
        let mut xi = Vec::new();
        if pick(2) == 1 {
            let sign = if pick(2) == 1 { 1 } else { -1 };
            xi.push((pick(n_vars as u32) as usize, q(sign * (pick(4) as i64 + 1)), pick(max_e) + 1));
        }
        out.push(SamplingPath { t, x, xi });
    }
    out
}

/// Sequence terms `n = start, …, start + terms − 1` and the tolerances.
#[derive(Clone, Debug)]
pub struct SampleParams {
    pub start: u32,
    pub terms: u32,
    /// Cauchy and dedup tolerance.
    pub tol: f64,
    /// Bracket-closure tolerance for emitted cones.
    pub bracket_tol: f64,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams {
            start: 24,
            terms: 24,
            tol: 1e-6,
            bracket_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TangentCone {
    /// Orthonormal float basis in the coordinates of `𝔤ₓ`.
    pub subspace: Subspace,
    pub witness: SamplingPath,
    pub codim: usize,
    pub bracket_residual: f64,
}

#[derive(Clone, Debug)]
pub enum PathOutcome {
    Cone(TangentCone),
    Diverged,
    Rejected(String),
}

#[derive(Clone, Debug, Default)]
pub struct ConeReport {
    pub cones: Vec<TangentCone>,
    pub diverged: usize,
    pub rejected: usize,
}

/// Evaluates sampling paths at a fixed point of a structure.
pub struct ConeSampler<'a> {
    basis: &'a GradedBasis,
    osc: &'a OsculatingAlgebra,
    q: QMatrix,
    qf: DMatrix<f64>,
    params: SampleParams,
}

impl<'a> ConeSampler<'a> {
    pub fn new(basis: &'a GradedBasis, osc: &'a OsculatingAlgebra, params: SampleParams) -> Self {
        let q = osc.quotient_map();
        let qf = q.to_f64();
        ConeSampler {
            basis,
            osc,
            q,
            qf,
            params,
        }
    }

    fn terms(&self) -> impl Iterator<Item = u32> {
        self.params.start..self.params.start + self.params.terms
    }

    /// Limit of `ker ♮ₓₙ,ₜₙ` pushed to `𝔤ₓ` through `♮ₓ,₀`.
    pub fn sample(&self, path: &SamplingPath) -> Result<PathOutcome> {
        let x = self.osc.point();
        let mut seq = Vec::new();
        for n in self.terms() {
            let (xn, tn) = path.at(x, n);
            seq.push(kernel(&natural_eval(self.basis, &xn, &tn)?));
        }
        let dims = seq[0].dim();
        if seq.iter().any(|s| s.dim() != dims) {
            return Ok(PathOutcome::Rejected(String::from("kernel dimension varies")));
        }
        let lim = match limit(&seq, self.params.tol)? {
            Limit::Converged(s) => s,
            Limit::Diverged { .. } => return Ok(PathOutcome::Diverged),
        };
        let cone = lim.map_float(&self.qf, IMAGE_RANK_TOL);
        let n_vars = x.len();
        let codim = self.osc.dim() - cone.dim();
        if codim != n_vars {
            return Ok(PathOutcome::Rejected(format!("codimension {codim} != {n_vars}")));
        }
        let residual = bracket_residual(self.osc, &cone);
        if residual > self.params.bracket_tol {
            return Ok(PathOutcome::Rejected(format!("bracket residual {residual:e}")));
        }
        Ok(PathOutcome::Cone(TangentCone {
            subspace: cone,
            witness: path.clone(),
            codim,
            bracket_residual: residual,
        }))
    }

    /// Merges outcomes in the given order, deduplicating cones by distance.
    pub fn merge(&self, outcomes: impl IntoIterator<Item = PathOutcome>) -> ConeReport {
        let mut rep = ConeReport::default();
        for o in outcomes {
            match o {
                PathOutcome::Diverged => rep.diverged += 1,
                PathOutcome::Rejected(_) => rep.rejected += 1,
                PathOutcome::Cone(c) => {
                    let dup = rep.cones.iter().any(|d| {
                        distance(&d.subspace, &c.subspace).map_or(false, |v| v < self.params.tol)
                    });
                    if !dup {
                        rep.cones.push(c);
                    }
                }
            }
        }
        rep
    }

    /// Directional sample: normalized limit of `ξₙ ∘ ♮ₓₙ,ₜₙ`, as a covector on `𝔤ₓ`.
    pub fn sample_covector(&self, xi: &[Q], path: &SamplingPath) -> Result<Option<Vec<f64>>> {
        let x = self.osc.point();
        let mut seq: Vec<DVector<f64>> = Vec::new();
        for n in self.terms() {
            let (xn, tn) = path.at(x, n);
            let m = natural_eval(self.basis, &xn, &tn)?;
            let phi = m.transpose().mul_vec(&path.covector_at(xi, n));
            let n2 = crate::linalg::dot(&phi, &phi);
            if n2.is_zero() {
                return Ok(None);
            }
            seq.push(DVector::from_iterator(
                phi.len(),
                phi.iter().map(|c| {
                    let r = libm::sqrt(to_f64(&(c * c / &n2)));
                    if c.is_negative() {
                        -r
                    } else {
                        r
                    }
                }),
            ));
        }
        let window = core::cmp::max(8, seq.len().div_ceil(10)).min(seq.len());
        let tail = &seq[seq.len() - window..];
        for a in tail {
            for b in tail {
                if (a - b).norm() >= self.params.tol {
                    return Ok(None);
                }
            }
        }
        let phi = seq.last().expect("nonempty").clone();
        // φ = qᵀη
        let gram = &self.qf * self.qf.transpose();
        let Some(inv) = gram.try_inverse() else {
            return Ok(None);
        };
        let eta = inv * (&self.qf * &phi);
        let resid = (self.qf.transpose() * &eta - &phi).norm();
        if resid > 1e3 * self.params.tol {
            return Ok(None);
        }
        let norm = eta.norm();
        if norm == 0.0 {
            return Ok(None);
        }
        Ok(Some((eta / norm).iter().copied().collect()))
    }

    pub fn exact_quotient(&self) -> &QMatrix {
        &self.q
    }
}

/// Largest distance from `[u, v]` to the cone over orthonormal basis pairs.
pub fn bracket_residual(osc: &OsculatingAlgebra, cone: &Subspace) -> f64 {
    let b = cone.float_basis();
    let p = cone.projector();
    let mut worst = 0.0f64;
    for i in 0..b.ncols() {
        for j in (i + 1)..b.ncols() {
            let u: Vec<f64> = b.column(i).iter().copied().collect();
            let v: Vec<f64> = b.column(j).iter().copied().collect();
            let w = DVector::from_vec(osc.algebra().bracket_f64(&u, &v));
            worst = worst.max((&w - &p * &w).norm());
        }
    }
    worst
}

pub fn sample_tangent_cones(
    basis: &GradedBasis,
    osc: &OsculatingAlgebra,
    strategy: &Strategy,
    params: SampleParams,
) -> Result<ConeReport> {
    let sampler = ConeSampler::new(basis, osc, params);
    let nu = basis.weights().first().map_or(1, |w| w.nu());
    let outcomes = strategy
        .paths(nu, osc.point().len())
        .iter()
        .map(|p| sampler.sample(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(sampler.merge(outcomes))
}

/// A sampled covector on `𝔤ₓ`, tagged with the cone it annihilates
/// (`None` for directional samples).
#[derive(Clone, Debug)]
pub struct HnCovector {
    pub coords: Vec<f64>,
    pub source: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct HnSample {
    pub covectors: Vec<HnCovector>,
    /// The cotangent direction for directional samples.
    pub direction: Option<Vec<Q>>,
}

/// Annihilators of the cones, with their dual dilates and coadjoint translates.
pub fn hn_at_point(
    osc: &OsculatingAlgebra,
    cones: &[TangentCone],
    dilations: &[Vec<Q>],
    translations: &[Vec<Q>],
) -> Result<HnSample> {
    if cones.is_empty() {
        return Err(Error::Invalid(String::from("no tangent cones given")));
    }
    let alg = osc.algebra();
    let mut transforms: Vec<DMatrix<f64>> = vec![DMatrix::identity(alg.dim(), alg.dim())];
    for l in dilations {
        crate::weight::check_dilation(l)?;
        let d = DMatrix::from_fn(alg.dim(), alg.dim(), |i, j| {
            if i == j {
                to_f64(&alg.weight(i).power(l))
            } else {
                0.0
            }
        });
        transforms.push(d);
    }
    for g in translations {
        let neg: Vec<Q> = g.iter().map(|c| -c.clone()).collect();
        transforms.push(alg.ad_exp(&neg)?.transpose().to_f64());
    }
    let mut out = Vec::new();
    for (ci, cone) in cones.iter().enumerate() {
        let ann = annihilator_float(&cone.subspace).float_basis();
        let mut samples: Vec<DVector<f64>> = ann.column_iter().map(|c| c.into_owned()).collect();
        if ann.ncols() > 1 {
            samples.push(ann.column_iter().fold(DVector::zeros(ann.nrows()), |a, c| a + c));
        }
        for s in &samples {
            for m in &transforms {
                out.push(HnCovector {
                    coords: (m * s).iter().copied().collect(),
                    source: Some(ci),
                });
            }
        }
    }
    Ok(HnSample {
        covectors: out,
        direction: None,
    })
}

/// Index of a cone annihilated by `eta` up to `tol·‖η‖`.
pub fn annihilated_cone(cones: &[TangentCone], eta: &[f64], tol: f64) -> Option<usize> {
    let e = DVector::from_column_slice(eta);
    let scale = e.norm().max(1e-300);
    cones.iter().position(|c| {
        let b = c.subspace.float_basis();
        (b.transpose() * &e).norm() <= tol * scale
    })
}

/// Normalized limits of `ξₙ ∘ ♮ₓₙ,ₜₙ` with `ξₙ → ξ`, deduplicated up to `tol`.
pub fn hn_directional(
    basis: &GradedBasis,
    osc: &OsculatingAlgebra,
    xi: &[Q],
    strategy: &Strategy,
    params: SampleParams,
) -> Result<HnSample> {
    if xi.iter().all(Zero::is_zero) {
        return Err(Error::Invalid(String::from("direction must be nonzero")));
    }
    if xi.len() != osc.point().len() {
        return Err(Error::DimensionMismatch {
            expected: osc.point().len(),
            found: xi.len(),
        });
    }
    let tol = params.tol;
    let sampler = ConeSampler::new(basis, osc, params);
    let nu = basis.weights().first().map_or(1, |w| w.nu());
    let mut out: Vec<HnCovector> = Vec::new();
    for p in strategy.paths(nu, xi.len()) {
        if let Some(eta) = sampler.sample_covector(xi, &p)? {
            merge_covector(&mut out, eta, tol);
        }
    }
    Ok(HnSample {
        covectors: out,
        direction: Some(xi.to_vec()),
    })
}

/// Appends `eta` unless an existing sample lies within `tol`.
pub fn merge_covector(out: &mut Vec<HnCovector>, eta: Vec<f64>, tol: f64) {
    let dup = out.iter().any(|c| {
        c.coords
            .iter()
            .zip(&eta)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            < tol * tol
    });
    if !dup {
        out.push(HnCovector {
            coords: eta,
            source: None,
        });
    }
}

/// Axis blocks `𝔤^{(i)}`: indices of classes whose grade is a multiple of `eᵢ`.
/// Fails if some class has mixed grade.
pub fn axis_blocks(osc: &OsculatingAlgebra) -> Result<Vec<Vec<usize>>> {
    let alg = osc.algebra();
    let nu = alg.nu();
    let mut blocks = vec![Vec::new(); nu];
    for i in 0..alg.dim() {
        let w = alg.weight(i);
        if w.support_len() != 1 {
            return Err(Error::NotWeaklyCommutative);
        }
        let axis = w.0.iter().position(|&e| e > 0).expect("support of size one");
        blocks[axis].push(i);
    }
    Ok(blocks)
}

/// Keeps covectors whose restriction to every axis block exceeds
/// `threshold·‖η‖`.
pub fn nonsingular_filter(osc: &OsculatingAlgebra, h: &HnSample, threshold: f64) -> Result<HnSample> {
    let blocks = axis_blocks(osc)?;
    let keep = |eta: &[f64]| {
        let total = libm::sqrt(eta.iter().map(|v| v * v).sum::<f64>());
        total > 0.0
            && blocks.iter().all(|b| {
                let part = libm::sqrt(b.iter().map(|&i| eta[i] * eta[i]).sum::<f64>());
                part > threshold * total
            })
    };
    Ok(HnSample {
        covectors: h.covectors.iter().filter(|c| keep(&c.coords)).cloned().collect(),
        direction: h.direction.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example::{example_osculating, example_structure};
    use crate::grading::build_graded_basis;
    use crate::rational::q;

    fn example_cones(n: u32, x: &[Q]) -> (GradedBasis, OsculatingAlgebra, ConeReport) {
        let b = build_graded_basis(&example_structure(n), false).unwrap();
        let osc = example_osculating(n, x, n + 3).unwrap();
        let rep = sample_tangent_cones(&b, &osc, &Strategy::default_rays(n), SampleParams::default()).unwrap();
        (b, osc, rep)
    }

    /// `η = (a, b, μa, μcb)` with `c = x^{N−1}`, `μ ≥ 0`.
    fn generic_form_residual(eta: &[f64], c: f64) -> f64 {
        let cross = eta[2] * c * eta[1] - eta[0] * eta[3];
        let sign = (-(eta[0] * eta[2])).max(0.0) + (-(eta[1] * eta[3])).max(0.0);
        cross.abs() + sign
    }

    #[test]
    fn cones_are_closed_and_of_full_codimension() {
        for x in [[q(1), q(0)], [q(0), q(0)]] {
            let (_, osc, rep) = example_cones(2, &x);
            assert_eq!(rep.rejected, 0);
            for c in &rep.cones {
                assert_eq!(c.codim, 2);
                assert!(bracket_residual(&osc, &c.subspace) <= 1e-8);
            }
        }
    }

    #[test]
    fn generic_hn_set_has_product_form() {
        let x = [q(2), q(0)];
        let (_, osc, rep) = example_cones(2, &x);
        let h = hn_at_point(&osc, &rep.cones, &[vec![q(2), q(3)]], &[]).unwrap();
        let ns = nonsingular_filter(&osc, &h, 1e-6).unwrap();
        assert!(!ns.covectors.is_empty());
        assert!(ns.covectors.len() < h.covectors.len());
        for eta in &ns.covectors {
            assert!(generic_form_residual(&eta.coords, 2.0) < 1e-9, "{:?}", eta.coords);
        }
    }

    #[test]
    fn directional_samples_follow_the_direction() {
        let x = [q(2), q(0)];
        let (b, osc, _) = example_cones(2, &x);
        let xi = [q(1), q(-3)];
        let run = |xi: &[Q]| {
            hn_directional(&b, &osc, xi, &Strategy::default_rays(2), SampleParams::default()).unwrap()
        };
        let d = run(&xi);
        assert!(!d.covectors.is_empty());
        for eta in &d.covectors {
            let e = &eta.coords;
            // X-block ∝ ξ and (Y, Z₁)-block ∝ (ξ_x, c·ξ_y), with c = 2
            assert!((e[0] * -3.0 - e[1]).abs() < 1e-9, "{e:?}");
            assert!((e[2] * -6.0 - e[3]).abs() < 1e-9, "{e:?}");
            assert!(generic_form_residual(e, 2.0) < 1e-9);
        }
        let neg = run(&[q(-1), q(3)]);
        assert_eq!(neg.covectors.len(), d.covectors.len());
        for (a, b) in d.covectors.iter().zip(&neg.covectors) {
            for (u, v) in a.coords.iter().zip(&b.coords) {
                assert!((u + v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn singular_line_blocks_and_annihilators() {
        let x = [q(0), q(0)];
        let (_, osc, rep) = example_cones(2, &x);
        assert_eq!(axis_blocks(&osc).unwrap(), vec![vec![0, 1], vec![2, 3, 4]]);
        let g = vec![q(0), q(0), q(1), q(0), q(0)];
        let h = hn_at_point(&osc, &rep.cones, &[], &[g]).unwrap();
        // every untranslated sample annihilates its source cone
        for (i, eta) in h.covectors.iter().enumerate().step_by(2) {
            let src = eta.source.unwrap();
            assert_eq!(annihilated_cone(&rep.cones[src..=src], &eta.coords, 1e-9), Some(0), "{i}");
        }
    }
}
