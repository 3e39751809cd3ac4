#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod catalog;
pub mod diffop;
pub mod error;
pub mod example;
pub mod field;
pub mod freelie;
pub mod grading;
pub mod grassmann;
pub mod hncone;
pub mod jets;
pub mod linalg;
pub mod nilpotent;
pub mod orbit;
pub mod osculating;
pub mod poly;
pub mod rational;
pub mod spectra;
pub mod symbol;
pub mod weight;

pub use error::{Error, Result};
pub use field::{lie_bracket, parse_field, VectorField};
pub use poly::{Monomial, Polynomial};
pub use rational::Q;
pub use grading::{GradedBasis, GradedStructure};
pub use nilpotent::NilpotentAlgebra;
pub use weight::WeightVector;
