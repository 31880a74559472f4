//! Operator-weighted multishifts on ℓ²_{ℂⁿ}(ℕ^d) and their truncations to
//! boxes.
//!
//! T_j sends fiber α to fiber α+ε_j through the weight A_α^{(j)}. The
//! truncation to a box keeps only the fibers inside it; since a box is a
//! down-set its span is co-invariant, so the truncation is a compression.

mod decompose;
mod intertwine;
mod tuple;
mod validate;
mod weights;

pub use decompose::{certificate_polynomials, decompose_diagonal, CertificateEntry, DiagonalDecomposition, NormCertificate, NORM_EQUALITY_TOL};
pub use intertwine::{unitary_intertwiner, Intertwiner, IntertwinerReport};
pub use tuple::{
    build_truncated_multishift, kron_to_fiber_major, sparse_norm_bound, tensor_tuple, truncated_unweighted_shift,
    CommutingTuple, TupleJson, TupleOperators, TUPLE_COMMUTING_TOL,
};
pub use validate::{validate_weights, DefectLocation, ValidationReport, COMMUTING_TOL};
pub use weights::{RuleFactory, ScalarWeights, TableEntry, WeightFamily, WeightRule, WeightRuleRegistry};
