//! Exact scalars, dense polynomials and reduced rational functions.

pub mod field;
pub mod poly;
pub mod ratfunc;

pub use field::Field;
pub use poly::DensePoly;
pub use ratfunc::RationalFunction;
