//! Complex dense matrices, sparse block operators and operator norms.

mod dense;
pub mod norm;
mod operator;
mod sparse;
mod svd;

pub use dense::{op_norm_dense, DenseMatrix};
pub use norm::{
    op_norm_sparse, NormEstimate, NormEstimator, NormMethod, NormRegistry, PowerIterationConfig,
    PowerIterationResult,
};
pub use operator::LinearOperator;
pub(crate) use operator::norm2;
pub use sparse::{Block, SparseBlockOperator};
pub use svd::Svd;

/// Largest dimension accepted by dense SVD and densification.
pub const DENSE_DIM_LIMIT: usize = 2048;
