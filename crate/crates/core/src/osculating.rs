//! The graded osculating algebra `𝔤ₓ = ⊕ₖ F^k / (F^{≺k} + C_x^∞·F^k)` at a
//! rational point, computed grade by grade with jet systems.
//!
//! For each grade `k` of the basis, the constants block of the jet system is
//! `{♮(v) : ω(v) = k}`. Row reduction with the jet unknowns first leaves
//! constraint rows on the constants alone; their RREF is the quotient map
//! `q_k : V^k → 𝔤ₓ^k`, and its pivot columns pick the basis elements whose
//! classes form the basis of `𝔤ₓ^k`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{lie_bracket, VectorField};
use crate::grading::{GradedBasis, GradedStructure};
use crate::jets::JetSystem;
use crate::linalg::QMatrix;
use crate::nilpotent::{Element, NilpotentAlgebra};
use crate::rational::Q;
use crate::weight::WeightVector;

/// Outcome of the jet membership test for `F^{≺k} + C_x^∞·F^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member,
    /// The jet system is already infeasible at this order.
    NotMember { order: u32 },
    /// The target is nonzero but its jet vanishes at the requested order.
    Inconclusive,
}

/// Default jet order `ΣNᵢ + 2`.
pub fn default_jet_order(s: &GradedStructure) -> u32 {
    s.depth().total() + 2
}

fn denominator(s: &GradedStructure, x: &[Q], k: &WeightVector, order: u32, constants: &[VectorField]) -> JetSystem {
    JetSystem::new(x, order, &s.prec_generators(k), &s.generators(k), constants)
}

/// Decides `[X]_{k,x} = 0` at the level of jets.
pub fn membership(
    field: &VectorField,
    k: &WeightVector,
    x: &[Q],
    s: &GradedStructure,
    jet_order: u32,
) -> Result<Membership> {
    check_point(s, x)?;
    let sys = denominator(s, x, k, jet_order, &[]);
    if !field.is_zero() && sys.target_jet_vanishes(field) {
        return Ok(Membership::Inconclusive);
    }
    if sys.feasible(field) {
        return Ok(Membership::Member);
    }
    for order in 0..jet_order {
        if !denominator(s, x, k, order, &[]).feasible(field) {
            return Ok(Membership::NotMember { order });
        }
    }
    Ok(Membership::NotMember { order: jet_order })
}

fn check_point(s: &GradedStructure, x: &[Q]) -> Result<()> {
    if x.len() != s.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: s.n_vars(),
            found: x.len(),
        });
    }
    Ok(())
}

#[derive(Clone)]
struct Grade {
    weight: WeightVector,
    /// Basis indices of weight exactly `weight`.
    members: Vec<usize>,
    /// `q_k`, one row per class.
    q: QMatrix,
    offset: usize,
    system: JetSystem,
}

#[derive(Clone)]
pub struct OsculatingAlgebra {
    algebra: NilpotentAlgebra,
    point: Vec<Q>,
    basis_dim: usize,
    grades: Vec<Grade>,
    /// Internal class coordinates to public coordinates.
    to_public: QMatrix,
    names: Vec<String>,
    jet_order: u32,
}

impl OsculatingAlgebra {
    pub fn algebra(&self) -> &NilpotentAlgebra {
        &self.algebra
    }

    pub fn point(&self) -> &[Q] {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn jet_order(&self) -> u32 {
        self.jet_order
    }

    /// `(grade, dimension)` for every grade of the basis, zero-dimensional ones included.
    pub fn grade_dims(&self) -> Vec<(WeightVector, usize)> {
        self.grades
            .iter()
            .map(|g| (g.weight.clone(), g.q.rows()))
            .collect()
    }

    /// The map `♮ₓ,₀ : V → 𝔤ₓ` as a `dim 𝔤ₓ × dim V` matrix.
    pub fn quotient_map(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim(), self.basis_dim);
        for g in &self.grades {
            for r in 0..g.q.rows() {
                for (c, &i) in g.members.iter().enumerate() {
                    m[(g.offset + r, i)] = g.q[(r, c)].clone();
                }
            }
        }
        self.to_public.mul(&m)
    }

    /// `♮ₓ,₀(v)` for basis coordinates `v`.
    pub fn project(&self, v: &[Q]) -> Element {
        self.quotient_map().mul_vec(v)
    }

    fn internal_class(&self, field: &VectorField, k: &WeightVector) -> Result<Element> {
        let mut out = vec![Q::zero(); self.dim()];
        if field.is_zero() {
            return Ok(out);
        }
        let Some(g) = self.grades.iter().find(|g| &g.weight == k) else {
            return Err(Error::NotExpressible {
                grade: format!("{k}"),
                jet_order: self.jet_order,
            });
        };
        let c = g.system.solve(field).ok_or_else(|| Error::NotExpressible {
            grade: format!("{k}"),
            jet_order: self.jet_order,
        })?;
        for (r, a) in g.q.mul_vec(&c).into_iter().enumerate() {
            out[g.offset + r] = a;
        }
        Ok(out)
    }

    /// `[X]_{k,x}` in the algebra's coordinates.
    pub fn class_of(&self, field: &VectorField, k: &WeightVector) -> Result<Element> {
        Ok(self.to_public.mul_vec(&self.internal_class(field, k)?))
    }

    /// Re-expresses the algebra in the basis of the given named classes.
    /// Each class must be pure of its stated grade; together they must form a basis.
    pub fn rebase(&self, classes: &[(String, VectorField, WeightVector)]) -> Result<OsculatingAlgebra> {
        if classes.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: classes.len(),
            });
        }
        let cols = classes
            .iter()
            .map(|(_, f, k)| self.class_of(f, k))
            .collect::<Result<Vec<_>>>()?;
        let p = QMatrix::from_columns(self.dim(), &cols);
        let weights = classes.iter().map(|(_, _, k)| k.clone()).collect();
        let algebra = self.algebra.change_basis(&p, weights)?;
        let inv = p.inverse().expect("checked by change_basis");
        Ok(OsculatingAlgebra {
            algebra,
            point: self.point.clone(),
            basis_dim: self.basis_dim,
            grades: self.grades.clone(),
            to_public: inv.mul(&self.to_public),
            names: classes.iter().map(|(n, _, _)| n.clone()).collect(),
            jet_order: self.jet_order,
        })
    }
}

/// Builds `𝔤ₓ` with classes ordered by (grade, basis index); grades are
/// ordered by total weight, then by first appearance in the basis.
pub fn osculating_algebra(
    s: &GradedStructure,
    b: &GradedBasis,
    x: &[Q],
    jet_order: u32,
) -> Result<OsculatingAlgebra> {
    check_point(s, x)?;
    let mut weights_order = b.grades();
    weights_order.sort_by_key(WeightVector::total);
    let mut grades = Vec::new();
    let mut class_weights = Vec::new();
    let mut names = Vec::new();
    let mut reps = Vec::new();
    for k in weights_order {
        let members = b.grade_indices(&k);
        let fields: Vec<VectorField> = members.iter().map(|&i| b.elements()[i].field.clone()).collect();
        let system = denominator(s, x, &k, jet_order, &fields);
        let rref = system.constant_constraints();
        for v in rref.matrix.nullspace() {
            let combo = fields
                .iter()
                .zip(&v)
                .fold(VectorField::zero(s.n_vars()), |acc, (f, c)| acc.add(&f.scale(c)));
            if !combo.is_zero() && system.target_jet_vanishes(&combo) {
                return Err(Error::Inconclusive {
                    grade: format!("{k}"),
                    jet_order,
                });
            }
        }
        let offset = class_weights.len();
        for &p in &rref.pivots {
            let i = members[p];
            class_weights.push(k.clone());
            names.push(b.elements()[i].label.clone());
            reps.push((i, k.clone()));
        }
        grades.push(Grade {
            weight: k,
            members,
            q: rref.matrix,
            offset,
            system,
        });
    }
    let dim = class_weights.len();
    let mut osc = OsculatingAlgebra {
        algebra: NilpotentAlgebra::abelian(class_weights.clone()),
        point: x.to_vec(),
        basis_dim: b.dim(),
        grades,
        to_public: QMatrix::identity(dim),
        names,
        jet_order,
    };
    let mut consts = Vec::new();
    for a in 0..dim {
        for c in (a + 1)..dim {
            let (ia, ka) = &reps[a];
            let (ic, kc) = &reps[c];
            let m = ka.add(kc);
            let br = lie_bracket(&b.elements()[*ia].field, &b.elements()[*ic].field)?;
            if br.is_zero() || !osc.grades.iter().any(|g| g.weight == m && g.q.rows() > 0) {
                continue;
            }
            for (k, v) in osc.internal_class(&br, &m)?.into_iter().enumerate() {
                if !v.is_zero() {
                    consts.push((a, c, k, v));
                }
            }
        }
    }
    osc.algebra = NilpotentAlgebra::from_upper(class_weights, consts)?;
    Ok(osc)
}
