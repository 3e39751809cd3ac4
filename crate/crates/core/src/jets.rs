//! Truncated Taylor-jet linear systems for module membership of polynomial
//! vector fields at a point.
//!
//! Unknowns are, in column order: the jet coefficients of free coefficient
//! functions `gᵢ` (orders `0..=J`), the jet coefficients of coefficient
//! functions `hⱼ` vanishing at the point (orders `1..=J`), and finally a block
//! of constant multipliers `c`. The equations compare the Taylor expansions at
//! the point of `target` and `Σ c·F + Σ g·Y + Σ h·Z` up to order `J`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::field::VectorField;
use crate::linalg::{QMatrix, Rref};
use crate::poly::{monomials_up_to, Monomial};
use crate::rational::Q;

#[derive(Clone, Debug)]
pub struct JetSystem {
    order: u32,
    n: usize,
    rows: BTreeMap<(usize, Monomial), usize>,
    matrix: QMatrix,
    n_jet: usize,
    n_const: usize,
    point: Vec<Q>,
}

impl JetSystem {
    pub fn new(
        point: &[Q],
        order: u32,
        free: &[VectorField],
        vanishing: &[VectorField],
        constants: &[VectorField],
    ) -> Self {
        let n = point.len();
        let monos = monomials_up_to(n, order);
        let mut rows = BTreeMap::new();
        for i in 0..n {
            for m in &monos {
                let r = rows.len();
                rows.insert((i, m.clone()), r);
            }
        }
        let mut columns: Vec<Vec<(usize, Q)>> = Vec::new();
        let push_jets = |field: &VectorField, min_deg: u32, columns: &mut Vec<Vec<(usize, Q)>>| {
            let shifted = field.shift(point).truncate(order);
            for a in monos.iter().filter(|m| m.degree() >= min_deg) {
                let mut col = Vec::new();
                for (i, comp) in shifted.iter().enumerate() {
                    for (b, c) in comp.terms() {
                        if a.degree() + b.degree() > order {
                            continue;
                        }
                        col.push((rows[&(i, a.mul(b))], c.clone()));
                    }
                }
                columns.push(col);
            }
        };
        for f in free {
            push_jets(f, 0, &mut columns);
        }
        for f in vanishing {
            push_jets(f, 1, &mut columns);
        }
        let n_jet = columns.len();
        for f in constants {
            let shifted = f.shift(point).truncate(order);
            let mut col = Vec::new();
            for (i, comp) in shifted.iter().enumerate() {
                for (b, c) in comp.terms() {
                    col.push((rows[&(i, b.clone())], c.clone()));
                }
            }
            columns.push(col);
        }
        let mut matrix = QMatrix::zeros(rows.len(), columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (r, c) in col {
                matrix[(*r, j)] += c;
            }
        }
        JetSystem {
            order,
            n,
            rows,
            matrix,
            n_jet,
            n_const: constants.len(),
            point: point.to_vec(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn target_vector(&self, target: &VectorField) -> Vec<Q> {
        let mut b = vec![Q::zero(); self.rows.len()];
        let shifted = target.shift(&self.point).truncate(self.order);
        for (i, comp) in shifted.iter().enumerate() {
            for (m, c) in comp.terms() {
                b[self.rows[&(i, m.clone())]] = c.clone();
            }
        }
        b
    }

    /// Whether the target's jet is entirely zero at this order.
    pub fn target_jet_vanishes(&self, target: &VectorField) -> bool {
        self.target_vector(target).iter().all(Zero::is_zero)
    }

    /// Solves for the constant block; `None` if the jet system is inconsistent.
    pub fn solve(&self, target: &VectorField) -> Option<Vec<Q>> {
        let b = self.target_vector(target);
        let x = self.matrix.solve(&b)?;
        Some(x[self.n_jet..].to_vec())
    }

    pub fn feasible(&self, target: &VectorField) -> bool {
        self.solve(target).is_some()
    }

    /// Linear constraints (in RREF) on the constant block that characterize
    /// `Σ c·F ∈ span(free, vanishing)` at jet level.
    pub fn constant_constraints(&self) -> Rref {
        let full = self.matrix.rref();
        let mut rows = Vec::new();
        for (r, &p) in full.pivots.iter().enumerate() {
            if p >= self.n_jet {
                rows.push(full.matrix.row(r)[self.n_jet..].to_vec());
            }
        }
        if rows.is_empty() {
            return Rref {
                matrix: QMatrix::zeros(0, self.n_const),
                pivots: Vec::new(),
            };
        }
        QMatrix::from_rows(&rows).rref()
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }
}

trait ShiftTruncate {
    fn truncate(&self, order: u32) -> Vec<crate::poly::Polynomial>;
}

impl ShiftTruncate for VectorField {
    fn truncate(&self, order: u32) -> Vec<crate::poly::Polynomial> {
        self.components().iter().map(|c| c.truncate(order)).collect()
    }
}
