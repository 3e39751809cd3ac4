//! Subspaces of ℚⁿ / ℝⁿ: kernels, annihilators, the projector gap metric and
//! limits of subspace sequences.
//!
//! Exact subspaces carry a rational basis; float subspaces an orthonormal one.
//! Conversion happens only through [`Subspace::to_float`].

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{to_f64, Q};

/// Relative singular-value threshold for float rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum Basis {
    Exact(Vec<Vec<Q>>),
    /// Orthonormal columns.
    Float(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: Basis,
}

impl Subspace {
    /// Span of the given vectors; dependent vectors are dropped.
    pub fn exact_span(ambient: usize, vectors: &[Vec<Q>]) -> Self {
        let keep = crate::linalg::independent_subset(vectors);
        Subspace {
            ambient,
            basis: Basis::Exact(keep.into_iter().map(|i| vectors[i].clone()).collect()),
        }
    }

    /// Span of the columns of `m`, orthonormalized with rank threshold [`RANK_TOL`].
    pub fn float_span(m: &DMatrix<f64>) -> Self {
        Subspace {
            ambient: m.nrows(),
            basis: Basis::Float(orthonormal_columns(m)),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Basis::Exact(Vec::new()),
        }
    }

    pub fn full(ambient: usize) -> Self {
        let mut vs = Vec::new();
        for i in 0..ambient {
            let mut v = vec![Q::from_integer(0.into()); ambient];
            v[i] = Q::from_integer(1.into());
            vs.push(v);
        }
        Subspace {
            ambient,
            basis: Basis::Exact(vs),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        match &self.basis {
            Basis::Exact(v) => v.len(),
            Basis::Float(m) => m.ncols(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.basis, Basis::Exact(_))
    }

    pub fn exact_basis(&self) -> Option<&[Vec<Q>]> {
        match &self.basis {
            Basis::Exact(v) => Some(v),
            Basis::Float(_) => None,
        }
    }

    /// Orthonormal float basis as columns.
    pub fn float_basis(&self) -> DMatrix<f64> {
        match &self.basis {
            Basis::Float(m) => m.clone(),
            Basis::Exact(v) => exact_orthonormal(self.ambient, v),
        }
    }

    pub fn to_float(&self) -> Subspace {
        Subspace {
            ambient: self.ambient,
            basis: Basis::Float(self.float_basis()),
        }
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        let q = self.float_basis();
        &q * q.transpose()
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let x = nalgebra::DVector::from_column_slice(v);
        let r = &x - self.projector() * &x;
        r.norm()
    }

    /// Image under a float map, with relative rank threshold `rank_tol`.
    pub fn map_float(&self, m: &DMatrix<f64>, rank_tol: f64) -> Subspace {
        let img = m * self.float_basis();
        Subspace {
            ambient: m.nrows(),
            basis: Basis::Float(orthonormal_columns_tol(&img, rank_tol)),
        }
    }

    /// Image under a linear map, in the same arithmetic mode.
    pub fn map(&self, m: &QMatrix) -> Subspace {
        match &self.basis {
            Basis::Exact(v) => {
                let imgs: Vec<Vec<Q>> = v.iter().map(|x| m.mul_vec(x)).collect();
                Subspace::exact_span(m.rows(), &imgs)
            }
            Basis::Float(q) => Subspace::float_span(&(m.to_f64() * q)),
        }
    }
}

/// Gram–Schmidt in exact arithmetic, then normalization entry by entry, so
/// that vectors of very different scales survive the conversion to floats.
fn exact_orthonormal(ambient: usize, v: &[Vec<Q>]) -> DMatrix<f64> {
    use num_traits::{Signed, Zero};
    let mut ortho: Vec<Vec<Q>> = Vec::with_capacity(v.len());
    let mut norms: Vec<Q> = Vec::with_capacity(v.len());
    for x in v {
        let mut w = x.clone();
        for (o, n2) in ortho.iter().zip(&norms) {
            let c = crate::linalg::dot(&w, o) / n2;
            if !c.is_zero() {
                for (wi, oi) in w.iter_mut().zip(o) {
                    *wi -= &c * oi;
                }
            }
        }
        let n2 = crate::linalg::dot(&w, &w);
        if n2.is_zero() {
            continue;
        }
        ortho.push(w);
        norms.push(n2);
    }
    DMatrix::from_fn(ambient, ortho.len(), |i, j| {
        let e = &ortho[j][i];
        let r = libm::sqrt(to_f64(&(e * e / &norms[j])));
        if e.is_negative() {
            -r
        } else {
            r
        }
    })
}

fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    orthonormal_columns_tol(m, RANK_TOL)
}

fn orthonormal_columns_tol(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol * smax.max(1.0))
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Exact null space.
pub fn kernel(m: &QMatrix) -> Subspace {
    Subspace {
        ambient: m.cols(),
        basis: Basis::Exact(m.nullspace()),
    }
}

/// Rank-revealing null space of a float matrix.
pub fn kernel_float(m: &DMatrix<f64>) -> Subspace {
    let n = m.ncols();
    // Pad to at least n rows so the SVD returns a full right factor.
    let rows = m.nrows().max(n);
    let padded = DMatrix::from_fn(rows, n, |i, j| if i < m.nrows() { m[(i, j)] } else { 0.0 });
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max().max(1.0);
    let null: Vec<usize> = (0..n)
        .filter(|&i| svd.singular_values[i] <= RANK_TOL * smax)
        .collect();
    let basis = DMatrix::from_fn(n, null.len(), |i, j| vt[(null[j], i)]);
    Subspace {
        ambient: n,
        basis: Basis::Float(basis),
    }
}

/// Gap metric `‖P₁ − P₂‖₂` between subspaces of equal dimension.
pub fn distance(a: &Subspace, b: &Subspace) -> Result<f64> {
    if a.ambient != b.ambient || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.projector() - b.projector();
    if d.nrows() == 0 {
        return Ok(0.0);
    }
    let eig = nalgebra::SymmetricEigen::new(d);
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).min(1.0))
}

#[derive(Clone, Debug)]
pub enum Limit {
    Converged(Subspace),
    /// Consecutive distances along the sequence.
    Diverged { trace: Vec<f64> },
}

/// Terminal subspace of a sequence whose tail (the last `max(8, 10%)`
/// terms) has diameter below `tol`.
pub fn limit(seq: &[Subspace], tol: f64) -> Result<Limit> {
    let Some(last) = seq.last() else {
        return Ok(Limit::Diverged { trace: Vec::new() });
    };
    let window = core::cmp::max(8, seq.len().div_ceil(10)).min(seq.len());
    let tail = &seq[seq.len() - window..];
    let floats: Vec<Subspace> = tail.iter().map(Subspace::to_float).collect();
    let mut diam = 0.0f64;
    for i in 0..floats.len() {
        for j in (i + 1)..floats.len() {
            diam = diam.max(distance(&floats[i], &floats[j])?);
        }
    }
    if diam < tol {
        return Ok(Limit::Converged(last.to_float()));
    }
    let trace = seq
        .windows(2)
        .map(|w| distance(&w[0], &w[1]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Limit::Diverged { trace })
}

/// `S^⊥ = {ξ : ξ(s) = 0 ∀ s ∈ S}` in the dual basis; exact mode only.
pub fn annihilator(s: &Subspace) -> Result<Subspace> {
    let Basis::Exact(v) = &s.basis else {
        return Err(Error::Invalid("annihilator requires an exact subspace".into()));
    };
    if v.is_empty() {
        return Ok(Subspace::full(s.ambient));
    }
    Ok(kernel(&QMatrix::from_rows(v)))
}

/// Float annihilator: orthogonal complement under the standard pairing.
pub fn annihilator_float(s: &Subspace) -> Subspace {
    let q = s.float_basis();
    if q.ncols() == 0 {
        return Subspace::float_span(&DMatrix::identity(s.ambient, s.ambient));
    }
    kernel_float(&q.transpose())
}
