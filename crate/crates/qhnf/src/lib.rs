//! Quasi-homogeneous normal forms of three-dimensional polynomial vector
//! fields whose principal part couples a planar Hamiltonian field with a
//! scalar drift.
//!
//! The symbolic core is generic over a coefficient ring ([`Scalar`]).  Exact
//! computations use [`Rational`]; the FitzHugh-Nagumo study runs the same
//! code over `f64`.

pub mod corpus;
pub mod error;
pub mod fhn;
pub mod format;
pub mod homolog;
pub mod hopfzero;
pub mod linalg;
pub mod nform;
pub mod qhpoly;
pub mod scalar;
pub mod sim;
pub mod split;
pub mod vfield;

pub use error::{QhError, Result};
pub use qhpoly::{graded_basis, GradedSlice, Monomial, Poly, QHType};
pub use scalar::{Rational, Scalar};
pub use vfield::{PrincipalPart, VField};

/// Exact polynomial.
pub type QPoly = Poly<Rational>;
/// Floating-point polynomial.
pub type FPoly = Poly<f64>;
/// Exact vector field.
pub type QField = VField<Rational>;
/// Floating-point vector field.
pub type FField = VField<f64>;
