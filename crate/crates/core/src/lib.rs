//! Bergman orthogonal polynomials of planar Jordan domains.
//!
//! The crate builds the orthonormal polynomials of a domain from its monomial
//! moment matrix, the Faber polynomials of its exterior map, pointwise
//! exterior and interior conformal maps, and the strong-asymptotic error
//! quantities relating them. Everything runs in a shared multiprecision
//! context ([`mp::Precision`]).

pub mod acceptance;
pub mod bergman;
pub mod conformal;
pub mod diagnostics;
pub mod error;
pub mod faber;
pub mod geometry;
pub mod linalg;
pub mod moments;
pub mod mp;
pub mod quadrature;
pub mod roots;
pub mod series;

pub use error::{Error, Result};
pub use mp::{Complex, Precision, Real};
