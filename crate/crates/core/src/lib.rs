//! Exact construction of discrete Sobolev orthogonal polynomials for inner
//! products built on the Hahn difference operator, with their ladder
//! operators and second-order holonomic difference equation.
//!
//! The math is generic over an exact [`Field`]; the aliases below fix it to
//! arbitrary-precision rationals, which is what the CLI and JSON formats use.

pub mod arith;
pub mod error;
pub mod family;
pub mod io;
pub mod ladder;
pub mod qcalc;
pub mod sobolev;
pub mod verify;

pub use arith::{DensePoly, Field, RationalFunction};
pub use error::{Error, Result};
pub use qcalc::{ModeKind, OperatorMode};

/// Arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;
/// Dense polynomial over [`Rational`].
pub type Poly = DensePoly<Rational>;
/// Reduced rational function over [`Rational`].
pub type RatFunc = RationalFunction<Rational>;
/// Operator configuration over [`Rational`].
pub type Mode = OperatorMode<Rational>;
/// Orthogonal family over [`Rational`].
pub type FamilySpec = family::Family<Rational>;
