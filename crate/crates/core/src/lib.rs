//! Quasi-periodic linear cocycles `F(x, v) = (x + omega, A(x) v)` over torus
//! translations, with `A` a matrix-valued trigonometric polynomial.
//!
//! Numerical routines are generic over [`scalar::Real`] (`f32`, `f64`); exact
//! ones over [`linalg::ExactField`]. The aliases below fix `f64` and the
//! rationals.

pub mod cocycle;
pub mod domination;
pub mod error;
pub mod gallery;
pub mod harness;
pub mod homology;
pub mod linalg;
pub mod lyapunov;
pub mod scalar;
pub mod topology;
pub mod torus;

pub use error::{Error, Result};

pub type Cocycle = cocycle::FourierCocycle<f64>;
pub type Trig = cocycle::TrigPolynomial<f64>;
pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Frame = linalg::SubspaceFrame<f64>;
pub type Point = torus::TorusPoint<f64>;
pub type Shift = torus::Translation<f64>;
pub type Report = lyapunov::LyapunovReport<f64>;
pub type Domination = domination::DominationVerdict<f64>;
pub type Field = topology::SphereField<f64>;
pub type RationalMatrix = linalg::ExactMatrix<num_rational::BigRational>;
pub type GaussianMatrix = linalg::ExactMatrix<linalg::GaussianRational>;
pub type Factor = homology::FactorInstance<num_rational::BigRational>;
