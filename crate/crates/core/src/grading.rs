//! Weighted families of vector fields, the filtration `F^k` they generate,
//! graded bases `(V, ♮)`, dilations and the evaluation maps `♮ₓ,ₜ`.
//!
//! `F^k` is represented by a finite generating set: the iterated brackets
//! ("atoms") of weight `⪯ k`, plus the coordinate fields once `F^k` is the
//! whole tangent module, which happens exactly when some `kᵢ ≥ Nᵢ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{lie_bracket, VectorField};
use crate::freelie::FreeLie;
use crate::jets::JetSystem;
use crate::linalg::QMatrix;
use crate::nilpotent::NilpotentAlgebra;
use crate::rational::Q;
use crate::weight::{check_dilation, WeightVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub weight: WeightVector,
    pub fields: Vec<VectorField>,
}

/// A nonzero iterated bracket of family fields, tagged with its weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub weight: WeightVector,
    pub field: VectorField,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct GradedStructure {
    vars: Vec<String>,
    depth: WeightVector,
    families: Vec<Family>,
    atoms: Vec<Atom>,
}

impl GradedStructure {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn nu(&self) -> usize {
        self.depth.nu()
    }

    pub fn depth(&self) -> &WeightVector {
        &self.depth
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `F^k = 𝒳(M)`: some `kᵢ ≥ Nᵢ`.
    pub fn is_full(&self, k: &WeightVector) -> bool {
        k.0.iter().zip(&self.depth.0).any(|(a, n)| a >= n)
    }

    /// `F^{≺k} = 𝒳(M)`: some `l ≺ k` has `lᵢ ≥ Nᵢ`.
    pub fn is_prec_full(&self, k: &WeightVector) -> bool {
        let nu = self.nu();
        (0..nu).any(|i| {
            let (ki, ni) = (k.0[i], self.depth.0[i]);
            ki >= ni && (ki > ni || k.support_len() > 1)
        })
    }

    fn coordinates(&self) -> Vec<VectorField> {
        (0..self.n_vars())
            .map(|i| VectorField::coordinate(self.n_vars(), i))
            .collect()
    }

    /// Generators of `F^k` over polynomial coefficients.
    pub fn generators(&self, k: &WeightVector) -> Vec<VectorField> {
        if self.is_full(k) {
            return self.coordinates();
        }
        self.atoms
            .iter()
            .filter(|a| a.weight.preceq(k))
            .map(|a| a.field.clone())
            .collect()
    }

    /// Generators of `F^{≺k} = Σ_{l ≺ k} F^l`.
    pub fn prec_generators(&self, k: &WeightVector) -> Vec<VectorField> {
        if self.is_prec_full(k) {
            return self.coordinates();
        }
        self.atoms
            .iter()
            .filter(|a| a.weight.prec(k))
            .map(|a| a.field.clone())
            .collect()
    }

    /// Distinct atom weights in first-appearance order.
    pub fn atom_weights(&self) -> Vec<WeightVector> {
        let mut out: Vec<WeightVector> = Vec::new();
        for a in &self.atoms {
            if !out.contains(&a.weight) {
                out.push(a.weight.clone());
            }
        }
        out
    }
}

/// Closes the families under brackets with weight addition, keeping only
/// weights `⪯ N` at which `F^{≺w}` is not already everything.
pub fn generate_filtration(
    vars: Vec<String>,
    families: Vec<Family>,
    depth: WeightVector,
) -> Result<GradedStructure> {
    let n = vars.len();
    let nu = depth.nu();
    if nu == 0 || depth.0.iter().any(|&d| d == 0) {
        return Err(Error::Invalid(format!("depth {depth} must have positive entries")));
    }
    for fam in &families {
        if fam.weight.nu() != nu {
            return Err(Error::WeightLength(format!(
                "family weight {} has length {}, expected {nu}",
                fam.weight,
                fam.weight.nu()
            )));
        }
        if fam.weight.is_zero() {
            return Err(Error::ZeroWeight);
        }
        if !fam.weight.preceq(&depth) {
            return Err(Error::Invalid(format!(
                "family weight {} exceeds depth {depth}",
                fam.weight
            )));
        }
        for f in &fam.fields {
            if f.n_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: f.n_vars(),
                });
            }
        }
    }
    let mut s = GradedStructure {
        vars,
        depth,
        families,
        atoms: Vec::new(),
    };
    let mut atoms: Vec<Atom> = Vec::new();
    for (fi, fam) in s.families.iter().enumerate() {
        for (j, f) in fam.fields.iter().enumerate() {
            push_atom(&mut atoms, fam.weight.clone(), f.clone(), family_label(fi, j));
        }
    }
    let mut done = 0;
    while done < atoms.len() {
        let hi = atoms.len();
        for j in done..hi {
            for i in 0..j {
                let w = atoms[i].weight.add(&atoms[j].weight);
                if !w.preceq(&s.depth) || s.is_prec_full(&w) {
                    continue;
                }
                let f = lie_bracket(&atoms[i].field, &atoms[j].field)?;
                let label = format!("[{},{}]", atoms[i].label, atoms[j].label);
                push_atom(&mut atoms, w, f, label);
            }
        }
        done = hi;
    }
    s.atoms = atoms;
    Ok(s)
}

/// Label of field `j` of family `f`, e.g. `F1.2`.
pub fn family_label(f: usize, j: usize) -> String {
    format!("F{}.{}", f + 1, j + 1)
}

fn push_atom(atoms: &mut Vec<Atom>, weight: WeightVector, field: VectorField, label: String) {
    if field.is_zero() {
        return;
    }
    if atoms
        .iter()
        .any(|a| a.weight == weight && a.field.ratio_to(&field).is_some())
    {
        return;
    }
    atoms.push(Atom {
        weight,
        field,
        label,
    });
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub weight: WeightVector,
    pub field: VectorField,
    pub label: String,
}

/// Pure-weight basis `V` with `♮`; `lie` holds structure constants for a
/// graded Lie basis.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    vars: Vec<String>,
    elements: Vec<BasisElement>,
    lie: Option<NilpotentAlgebra>,
}

impl GradedBasis {
    pub fn new(vars: Vec<String>, elements: Vec<BasisElement>, lie: Option<NilpotentAlgebra>) -> Self {
        GradedBasis { vars, elements, lie }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn weights(&self) -> Vec<WeightVector> {
        self.elements.iter().map(|e| e.weight.clone()).collect()
    }

    pub fn lie(&self) -> Option<&NilpotentAlgebra> {
        self.lie.as_ref()
    }

    pub fn is_lie(&self) -> bool {
        self.lie.is_some()
    }

    /// `♮(v)` for coordinates `v`.
    pub fn natural(&self, v: &[Q]) -> VectorField {
        let mut acc = VectorField::zero(self.vars.len());
        for (c, e) in v.iter().zip(&self.elements) {
            if !c.is_zero() {
                acc = acc.add(&e.field.scale(c));
            }
        }
        acc
    }

    /// Indices of elements of weight exactly `k`.
    pub fn grade_indices(&self, k: &WeightVector) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| &self.elements[i].weight == k)
            .collect()
    }

    /// Distinct weights in order of first appearance.
    pub fn grades(&self) -> Vec<WeightVector> {
        let mut out: Vec<WeightVector> = Vec::new();
        for e in &self.elements {
            if !out.contains(&e.weight) {
                out.push(e.weight.clone());
            }
        }
        out
    }
}

/// The atoms as a basis, or for `lie` the free Lie algebra on the family
/// fields truncated at weight `N`. Beyond `N` every `F^{≺k}` is full, so the
/// truncation still satisfies `[♮v, ♮w] − ♮[v,w] ∈ F^{≺(k+l)}`.
pub fn build_graded_basis(s: &GradedStructure, lie: bool) -> Result<GradedBasis> {
    if !lie {
        let elements = s
            .atoms
            .iter()
            .map(|a| BasisElement {
                weight: a.weight.clone(),
                field: a.field.clone(),
                label: a.label.clone(),
            })
            .collect();
        return Ok(GradedBasis::new(s.vars.clone(), elements, None));
    }
    let mut letters = Vec::new();
    let mut letter_fields = Vec::new();
    let mut letter_labels = Vec::new();
    for (fi, fam) in s.families.iter().enumerate() {
        for (j, f) in fam.fields.iter().enumerate() {
            letters.push(fam.weight.clone());
            letter_fields.push(f.clone());
            letter_labels.push(family_label(fi, j));
        }
    }
    let fl = FreeLie::new(letters, s.depth.clone());
    let mut elements: Vec<BasisElement> = Vec::with_capacity(fl.dim());
    for i in 0..fl.dim() {
        let weight = fl.weights()[i].clone();
        let el = match fl.factors(i) {
            None => {
                let l = fl.word(i)[0] as usize;
                BasisElement {
                    weight,
                    field: letter_fields[l].clone(),
                    label: letter_labels[l].clone(),
                }
            }
            Some((u, v)) => BasisElement {
                weight,
                field: lie_bracket(&elements[u].field, &elements[v].field)?,
                label: format!("[{},{}]", elements[u].label, elements[v].label),
            },
        };
        elements.push(el);
    }
    let alg = fl.algebra();
    Ok(GradedBasis::new(s.vars.clone(), elements, Some(alg)))
}

/// `α_λ` on coordinates: the grade-`k` part is multiplied by `λᵏ`.
pub fn dilate(b: &GradedBasis, v: &[Q], lambda: &[Q]) -> Result<Vec<Q>> {
    if v.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: v.len(),
        });
    }
    check_dilation(lambda)?;
    Ok(v.iter()
        .zip(&b.elements)
        .map(|(c, e)| c * e.weight.power(lambda))
        .collect())
}

/// Matrix of `♮ₓ,ₜ : V → TₓM`; column `i` is `t^{ω(i)}·♮(vᵢ)(x)`.
pub fn natural_eval(b: &GradedBasis, x: &[Q], t: &[Q]) -> Result<QMatrix> {
    if t.iter().any(Signed::is_negative) {
        return Err(Error::NegativeDilation);
    }
    if t.iter().all(Zero::is_zero) {
        return Err(Error::ZeroTime);
    }
    let cols = b
        .elements
        .iter()
        .map(|e| {
            let s = e.weight.power(t);
            Ok(e.field.evaluate(x)?.into_iter().map(|c| c * &s).collect())
        })
        .collect::<Result<Vec<Vec<Q>>>>()?;
    Ok(QMatrix::from_columns(x.len(), &cols))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HormanderPoint {
    pub point: Vec<Q>,
    pub rank: usize,
    pub full: bool,
}

/// Rank of `♮ₓ,₁` at each grid point.
pub fn check_hormander(b: &GradedBasis, grid: &[Vec<Q>]) -> Result<Vec<HormanderPoint>> {
    let ones = alloc::vec![Q::one(); b.elements.first().map_or(1, |e| e.weight.nu())];
    grid.iter()
        .map(|x| {
            let rank = natural_eval(b, x, &ones)?.rank();
            Ok(HormanderPoint {
                point: x.clone(),
                rank,
                full: rank == x.len(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakWitness {
    pub label: String,
    pub weight: WeightVector,
    pub field: VectorField,
    pub point: Vec<Q>,
}

/// Checks on the grid that every mixed-weight atom lies in `Σᵢ F^{kᵢ eᵢ}`.
/// Returns the first counterexample, or `None` when the property holds.
pub fn check_weak_commutativity(
    s: &GradedStructure,
    grid: &[Vec<Q>],
    jet_order: u32,
) -> Result<Option<WeakWitness>> {
    let nu = s.nu();
    if nu <= 1 {
        return Ok(None);
    }
    for atom in s.atoms.iter().filter(|a| a.weight.support_len() > 1) {
        let mut gens = Vec::new();
        for i in 0..nu {
            let ki = atom.weight.0[i];
            if ki > 0 {
                gens.extend(s.generators(&WeightVector::axis(nu, i, ki)));
            }
        }
        for x in grid {
            if x.len() != s.n_vars() {
                return Err(Error::DimensionMismatch {
                    expected: s.n_vars(),
                    found: x.len(),
                });
            }
            let sys = JetSystem::new(x, jet_order, &gens, &[], &[]);
            if !sys.feasible(&atom.field) {
                return Ok(Some(WeakWitness {
                    label: atom.label.clone(),
                    weight: atom.weight.clone(),
                    field: atom.field.clone(),
                    point: x.clone(),
                }));
            }
        }
    }
    Ok(None)
}
