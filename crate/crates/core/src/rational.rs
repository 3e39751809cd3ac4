//! Exact rational scalars.

use alloc::string::{String, ToString};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// `p/q`, or `p` when the denominator is one.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        alloc::format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p` or `p/q` with an optional sign.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (s, None),
    };
    let n: BigInt = num.parse().ok()?;
    match den {
        Some(d) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(n)),
    }
}

pub fn to_f64(x: &Q) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // huge numerators/denominators: scale by bit length
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = nb - db;
    let scaled = if shift > 0 {
        Q::new(x.numer().clone(), x.denom().clone() << (shift as usize))
    } else {
        Q::new(x.numer().clone() << ((-shift) as usize), x.denom().clone())
    };
    scaled.to_f64().unwrap_or(0.0) * libm::pow(2.0, shift as f64)
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

/// `x^e` for a non-negative integer exponent with `0^0 = 1`.
pub fn pow_u(x: &Q, e: u32) -> Q {
    num_traits::pow(x.clone(), e as usize)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}
