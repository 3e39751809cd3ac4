//! The bigraded family on ℝ² with weight `(1,0)` fields `∂x, ∂y` and weight
//! `(0,1)` fields `∂x, x^{N−1}∂y`, depth `(1,N)`, together with the named
//! classes `X₁, X₂, Y, Z₁, …, Z_N` of its osculating algebras.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::Result;
use crate::field::VectorField;
use crate::grading::{build_graded_basis, generate_filtration, Family, GradedStructure};
use crate::osculating::{osculating_algebra, OsculatingAlgebra};
use crate::poly::{Monomial, Polynomial};
use crate::rational::{one, Q};
use crate::symbol::{parse_operator, Generator, WeightedOperator};
use crate::weight::WeightVector;

pub fn xy() -> Vec<String> {
    vec![String::from("x"), String::from("y")]
}

/// `x^e ∂y`.
pub fn x_pow_dy(e: u32) -> VectorField {
    VectorField::from_components(vec![
        Polynomial::zero(2),
        Polynomial::term(2, Monomial(vec![e, 0]), one()),
    ])
    .expect("two components")
}

pub fn dx() -> VectorField {
    VectorField::coordinate(2, 0)
}

pub fn dy() -> VectorField {
    VectorField::coordinate(2, 1)
}

pub fn example_structure(n: u32) -> GradedStructure {
    assert!(n >= 1, "depth N must be positive");
    let families = vec![
        Family {
            weight: WeightVector(vec![1, 0]),
            fields: vec![dx(), dy()],
        },
        Family {
            weight: WeightVector(vec![0, 1]),
            fields: vec![dx(), x_pow_dy(n - 1)],
        },
    ];
    generate_filtration(xy(), families, WeightVector(vec![1, n])).expect("valid example family")
}

/// Named classes: `X₁, X₂, Y, Z₁` at `x ≠ 0`; `X₁, X₂, Y, Z₁, …, Z_N` on `x = 0`,
/// with `Z_k = [x^{N−k}∂y]_{(0,k)}`.
pub fn example_classes(n: u32, point: &[Q]) -> Vec<(String, VectorField, WeightVector)> {
    let mut out = vec![
        (String::from("X1"), dx(), WeightVector(vec![1, 0])),
        (String::from("X2"), dy(), WeightVector(vec![1, 0])),
        (String::from("Y"), dx(), WeightVector(vec![0, 1])),
    ];
    let top = if point[0].is_zero() { n } else { 1 };
    for k in 1..=top {
        out.push((format!("Z{k}"), x_pow_dy(n - k), WeightVector(vec![0, k])));
    }
    out
}

/// `𝔤ₓ` of the example in the named basis.
pub fn example_osculating(n: u32, point: &[Q], jet_order: u32) -> Result<OsculatingAlgebra> {
    let s = example_structure(n);
    let b = build_graded_basis(&s, false)?;
    let osc = osculating_algebra(&s, &b, point, jet_order)?;
    osc.rebase(&example_classes(n, point))
}

/// Generators `X₁, X₂, Y, Z₁, …, Z_N` for operator expressions.
pub fn example_generators(n: u32) -> Vec<Generator> {
    let mut g: Vec<Generator> = [("X1", dx(), [1, 0]), ("X2", dy(), [1, 0]), ("Y", dx(), [0, 1])]
        .into_iter()
        .map(|(name, field, w)| Generator {
            name: String::from(name),
            weight: WeightVector(w.to_vec()),
            field,
        })
        .collect();
    for k in 1..=n {
        g.push(Generator {
            name: format!("Z{k}"),
            weight: WeightVector(vec![0, k]),
            field: x_pow_dy(n - k),
        });
    }
    g
}

/// `D_c = (X₁² + X₂²)(Y² + Z₁²)^N + c·Z_N²X₂²` of order `(2, 2N)`.
pub fn example_d_c(n: u32, c: Q) -> Result<WeightedOperator> {
    let src = format!("(X1^2 + X2^2)*(Y^2 + Z1^2)^{n} + c*Z{n}^2*X2^2");
    parse_operator(&src, example_generators(n), &xy(), &[(String::from("c"), c)], WeightVector(vec![2, 2 * n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osculating::{membership, Membership};
    use crate::rational::q;

    #[test]
    fn basis_of_five_for_n2() {
        let s = example_structure(2);
        let b = build_graded_basis(&s, false).unwrap();
        let ws: Vec<Vec<u32>> = b.elements().iter().map(|e| e.weight.0.clone()).collect();
        assert_eq!(ws, vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1], vec![0, 2]]);
        assert_eq!(b.elements()[3].field, x_pow_dy(1));
        assert_eq!(b.elements()[4].field, dy());
    }

    #[test]
    fn membership_cases() {
        let s = example_structure(2);
        let k01 = WeightVector(vec![0, 1]);
        // Z₁ = [x∂y] survives at the origin
        assert!(matches!(
            membership(&x_pow_dy(1), &k01, &[q(0), q(0)], &s, 6).unwrap(),
            Membership::NotMember { .. }
        ));
        assert!(matches!(
            membership(&dx(), &WeightVector(vec![1, 0]), &[q(3), q(1)], &s, 6).unwrap(),
            Membership::NotMember { order: 0 }
        ));
        // ∂y = (1/x)·x∂y ∈ F^{(0,1)} near x = 1, so it dies in grade (0,2)
        assert_eq!(
            membership(&dy(), &WeightVector(vec![0, 2]), &[q(1), q(0)], &s, 6).unwrap(),
            Membership::Member
        );
        assert!(matches!(
            membership(&dy(), &k01, &[q(1), q(0)], &s, 6).unwrap(),
            Membership::NotMember { .. }
        ));
    }

    #[test]
    fn generic_point_is_abelian_of_dim_four() {
        for n in 1..=3 {
            let osc = example_osculating(n, &[q(1), q(0)], n + 3).unwrap();
            assert_eq!(osc.dim(), 4);
            assert!(osc.algebra().is_abelian());
        }
    }

    #[test]
    fn singular_line_brackets() {
        for n in 2..=4u32 {
            let osc = example_osculating(n, &[q(0), q(5)], n + 3).unwrap();
            assert_eq!(osc.dim(), n as usize + 3);
            let a = osc.algebra();
            for (i, j, k, c) in a.upper_constants() {
                // only [Y, Z_k] = (N−k) Z_{k+1}
                assert_eq!(i, 2);
                let zk = (j - 2) as u32;
                assert_eq!(k, j + 1);
                assert_eq!(c, q((n - zk) as i64));
            }
            assert_eq!(a.upper_constants().len(), n as usize - 1);
        }
    }

    #[test]
    fn class_of_scales_by_value() {
        let osc = example_osculating(2, &[q(0), q(0)], 6).unwrap();
        let f = dx().mul_poly(&Polynomial::one(2).add(&Polynomial::var(2, 0)));
        assert_eq!(
            osc.class_of(&f, &WeightVector(vec![1, 0])).unwrap(),
            vec![q(1), q(0), q(0), q(0), q(0)]
        );
        let osc1 = example_osculating(2, &[q(1), q(0)], 6).unwrap();
        assert_eq!(
            osc1.class_of(&x_pow_dy(1), &WeightVector(vec![0, 1])).unwrap(),
            vec![q(0), q(0), q(0), q(1)]
        );
    }
}
