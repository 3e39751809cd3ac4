//! Closed-form tangent cones of the bigraded example family, in the named
//! basis `X₁, X₂, Y, Z₁, …` of [`crate::example`], and matching of sampled
//! cones against them.
//!
//! Off the line `x = 0` (and for `N = 1`) the cones are
//! `L_λ = span{λX₁ − Y, λx^{N−1}X₂ − Z₁}` for `λ ≥ 0` and `L_∞ = span{X₁, X₂}`.
//! On `x = 0` with `N ≥ 2` they are
//! `L_λ = span{λX₁ − Y, Z₁, …, Z_N}`, `L_∞ = span{X₁, Z₁, …, Z_N}`,
//! `L_{∞,ζ} = span{X₁, X₂ − ζZ₁, Z₂, …, Z_N}` (`ζ ≥ 0` when `N` is odd) and
//! `L_{∞,μ,η} = span{X₁, X₂ − ηZ_N, Z_k − μ^{N−k}Z_N (k < N)}` with `η ≥ 0`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::grading::GradedStructure;
use crate::grassmann::{distance, Subspace};
use crate::rational::{to_f64, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CatalogFamily {
    Lambda,
    Infinity,
    InfinityZeta,
    InfinityMuEta,
}

impl CatalogFamily {
    pub fn name(self) -> &'static str {
        match self {
            CatalogFamily::Lambda => "L_lambda",
            CatalogFamily::Infinity => "L_inf",
            CatalogFamily::InfinityZeta => "L_inf_zeta",
            CatalogFamily::InfinityMuEta => "L_inf_mu_eta",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CatalogCone {
    pub family: CatalogFamily,
    pub params: Vec<f64>,
    pub subspace: Subspace,
}

#[derive(Clone, Debug, Default)]
pub struct CatalogGrid {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CatalogMatch {
    pub family: CatalogFamily,
    pub params: Vec<f64>,
    pub distance: f64,
}

/// Depth `N` if `s` is the example family (fields compared exactly).
pub fn identify_example(s: &GradedStructure) -> Option<u32> {
    let depth = s.depth();
    if depth.nu() != 2 || depth.0[0] != 1 || s.n_vars() != 2 {
        return None;
    }
    let n = depth.0[1];
    let ex = crate::example::example_structure(n);
    (ex.families() == s.families()).then_some(n)
}

fn singular(n: u32, x: &[Q]) -> bool {
    n >= 2 && x[0].is_zero()
}

pub fn families_at(n: u32, x: &[Q]) -> Vec<CatalogFamily> {
    if singular(n, x) {
        vec![
            CatalogFamily::Lambda,
            CatalogFamily::Infinity,
            CatalogFamily::InfinityZeta,
            CatalogFamily::InfinityMuEta,
        ]
    } else {
        vec![CatalogFamily::Lambda, CatalogFamily::Infinity]
    }
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

/// The member of `family` with the given parameters, as a float subspace.
pub fn catalog_member(n: u32, x: &[Q], family: CatalogFamily, params: &[f64]) -> Result<Subspace> {
    let sing = singular(n, x);
    let d = if sing { n as usize + 3 } else { 4 };
    let z = |k: u32| 2 + k as usize;
    let need = match family {
        CatalogFamily::Lambda | CatalogFamily::InfinityZeta => 1,
        CatalogFamily::Infinity => 0,
        CatalogFamily::InfinityMuEta => 2,
    };
    if params.len() != need {
        return Err(Error::Arity {
            expected: need,
            found: params.len(),
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if !sing {
        let c = libm::pow(to_f64(&x[0]), n as f64 - 1.0);
        match family {
            CatalogFamily::Lambda => {
                let l = params[0];
                rows.push(vec![l, 0.0, -1.0, 0.0]);
                rows.push(vec![0.0, l * c, 0.0, -1.0]);
            }
            CatalogFamily::Infinity => {
                rows.push(unit(d, 0));
                rows.push(unit(d, 1));
            }
            _ => return Err(Error::WrongStructure(String::from("family exists only on x = 0"))),
        }
    } else {
        match family {
            CatalogFamily::Lambda => {
                let mut r = vec![0.0; d];
                r[0] = params[0];
                r[2] = -1.0;
                rows.push(r);
                rows.extend((1..=n).map(|k| unit(d, z(k))));
            }
            CatalogFamily::Infinity => {
                rows.push(unit(d, 0));
                rows.extend((1..=n).map(|k| unit(d, z(k))));
            }
            CatalogFamily::InfinityZeta => {
                rows.push(unit(d, 0));
                let mut r = unit(d, 1);
                r[z(1)] = -params[0];
                rows.push(r);
                rows.extend((2..=n).map(|k| unit(d, z(k))));
            }
            CatalogFamily::InfinityMuEta => {
                let (mu, eta) = (params[0], params[1]);
                rows.push(unit(d, 0));
                let mut r = unit(d, 1);
                r[z(n)] = -eta;
                rows.push(r);
                for k in 1..n {
                    let mut r = unit(d, z(k));
                    r[z(n)] = -libm::pow(mu, (n - k) as f64);
                    rows.push(r);
                }
            }
        }
    }
    let m = DMatrix::from_fn(d, rows.len(), |i, j| rows[j][i]);
    Ok(Subspace::float_span(&m))
}

/// Catalog members on the parameter grid, within each family's range.
pub fn example_cone_catalog(n: u32, x: &[Q], grid: &CatalogGrid) -> Result<Vec<CatalogCone>> {
    let mut out = Vec::new();
    for fam in families_at(n, x) {
        let sets: Vec<Vec<f64>> = match fam {
            CatalogFamily::Lambda => grid.lambda.iter().filter(|&&l| l >= 0.0).map(|&l| vec![l]).collect(),
            CatalogFamily::Infinity => vec![Vec::new()],
            CatalogFamily::InfinityZeta => grid
                .zeta
                .iter()
                .filter(|&&z| n % 2 == 0 || z >= 0.0)
                .map(|&z| vec![z])
                .collect(),
            CatalogFamily::InfinityMuEta => grid
                .mu
                .iter()
                .flat_map(|&m| grid.eta.iter().filter(|&&e| e >= 0.0).map(move |&e| vec![m, e]))
                .collect(),
        };
        for p in sets {
            let subspace = catalog_member(n, x, fam, &p)?;
            out.push(CatalogCone {
                family: fam,
                params: p,
                subspace,
            });
        }
    }
    Ok(out)
}

/// Pivot coordinates over which each family is a graph.
fn pivots(n: u32, sing: bool, fam: CatalogFamily) -> Vec<usize> {
    let z = |k: u32| 2 + k as usize;
    match (sing, fam) {
        (false, CatalogFamily::Lambda) => vec![2, 3],
        (false, _) => vec![0, 1],
        (true, CatalogFamily::Lambda) => core::iter::once(2).chain((1..=n).map(z)).collect(),
        (true, CatalogFamily::Infinity) => core::iter::once(0).chain((1..=n).map(z)).collect(),
        (true, CatalogFamily::InfinityZeta) => [0, 1].into_iter().chain((2..=n).map(z)).collect(),
        (true, CatalogFamily::InfinityMuEta) => [0, 1].into_iter().chain((1..n).map(z)).collect(),
    }
}

/// Reads the family parameters off the graph representation of `cone`,
/// rebuilds the member and keeps the closest family within `tol`.
pub fn match_example_cone(n: u32, x: &[Q], cone: &Subspace, tol: f64) -> Result<Option<CatalogMatch>> {
    let sing = singular(n, x);
    let d = if sing { n as usize + 3 } else { 4 };
    if cone.ambient() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: cone.ambient(),
        });
    }
    let b = cone.float_basis();
    let mut best: Option<CatalogMatch> = None;
    for fam in families_at(n, x) {
        let piv = pivots(n, sing, fam);
        if piv.len() != b.ncols() {
            continue;
        }
        let bp = DMatrix::from_fn(piv.len(), b.ncols(), |i, j| b[(piv[i], j)]);
        let sv = bp.clone().singular_values();
        if sv.min() < 1e-8 {
            continue;
        }
        let Some(inv) = bp.try_inverse() else { continue };
        // column j: the cone vector with unit coordinate at piv[j]
        let a = &b * inv;
        let z = |k: u32| 2 + k as usize;
        let col = |p: usize| piv.iter().position(|&q| q == p).expect("pivot");
        let params = match (sing, fam) {
            (_, CatalogFamily::Lambda) => vec![(-a[(0, col(2))]).max(0.0)],
            (_, CatalogFamily::Infinity) => Vec::new(),
            (true, CatalogFamily::InfinityZeta) => {
                let zeta = -a[(z(1), col(1))];
                vec![if n % 2 == 1 { zeta.max(0.0) } else { zeta }]
            }
            (true, CatalogFamily::InfinityMuEta) => {
                let eta = (-a[(z(n), col(1))]).max(0.0);
                let mu = -a[(z(n), col(z(n - 1)))];
                vec![mu, eta]
            }
            _ => continue,
        };
        let member = catalog_member(n, x, fam, &params)?;
        let dist = distance(&member, cone)?;
        if dist < tol && best.as_ref().map_or(true, |m| dist < m.distance) {
            best = Some(CatalogMatch {
                family: fam,
                params,
                distance: dist,
            });
        }
    }
    Ok(best)
}
