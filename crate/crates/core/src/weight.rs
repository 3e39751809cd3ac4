//! Multi-degrees `k ∈ ℤ₊^ν` and the componentwise order `⪯`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rational::{pow_u, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightVector(pub Vec<u32>);

impl WeightVector {
    pub fn new(entries: Vec<u32>) -> Self {
        WeightVector(entries)
    }

    pub fn zero(nu: usize) -> Self {
        WeightVector(alloc::vec![0; nu])
    }

    /// `k·eᵢ`.
    pub fn axis(nu: usize, i: usize, k: u32) -> Self {
        let mut w = Self::zero(nu);
        w.0[i] = k;
        w
    }

    pub fn nu(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `self ⪯ other`.
    pub fn preceq(&self, other: &WeightVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self ≺ other`: `⪯` and distinct.
    pub fn prec(&self, other: &WeightVector) -> bool {
        self != other && self.preceq(other)
    }

    pub fn add(&self, other: &WeightVector) -> WeightVector {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &WeightVector) -> WeightVector {
        WeightVector(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Number of nonzero components.
    pub fn support_len(&self) -> usize {
        self.0.iter().filter(|&&e| e > 0).count()
    }

    /// `t^k = Π tᵢ^{kᵢ}` with `0⁰ = 1`.
    pub fn power(&self, t: &[Q]) -> Q {
        let mut acc = crate::rational::one();
        for (x, &e) in t.iter().zip(&self.0) {
            if e > 0 {
                acc *= pow_u(x, e);
            }
        }
        acc
    }

    pub fn power_f64(&self, t: &[f64]) -> f64 {
        let mut acc = 1.0;
        for (x, &e) in t.iter().zip(&self.0) {
            if e > 0 {
                acc *= libm::pow(*x, e as f64);
            }
        }
        acc
    }

    /// Parses `1,0` or `(1, 0)`.
    pub fn parse(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut out = Vec::new();
        for part in inner.split(',') {
            let p = part.trim();
            out.push(
                p.parse::<u32>()
                    .map_err(|_| Error::WeightLength(String::from(s)))?,
            );
        }
        Ok(WeightVector(out))
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", e)?;
        }
        f.write_str(")")
    }
}

/// Checks that every entry of `lambda` is non-negative.
pub fn check_dilation(lambda: &[Q]) -> Result<()> {
    use num_traits::Signed;
    if lambda.iter().any(Signed::is_negative) {
        return Err(Error::NegativeDilation);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use alloc::vec;

    #[test]
    fn order_and_power() {
        let a = WeightVector(vec![1, 0]);
        let b = WeightVector(vec![1, 2]);
        assert!(a.prec(&b) && !b.preceq(&a) && !a.prec(&a));
        assert_eq!(b.power(&[q(2), q(3)]), q(18));
        assert_eq!(a.power(&[q(0), q(0)]), q(0));
        assert_eq!(WeightVector(vec![0, 2]).power(&[q(0), q(1)]), q(1));
        assert_eq!(WeightVector::parse("(1, 2)").unwrap(), b);
    }
}
