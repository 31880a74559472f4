//! Numerical laboratory for von Neumann's inequality on commuting tuples of
//! contractions: finite matrix tuples, truncated operator-valued
//! multishifts and their Kronecker products.

pub mod calculus;
pub mod error;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod multishift;
pub mod poly;
pub mod sampling;
pub mod vncheck;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
