use num_complex::Complex64 as C64;

use super::dense::DenseMatrix;

/// Square operator accessed through matrix-vector products.
///
/// Implementations must be safe to apply concurrently from several threads.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y ← M·x`
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// `y ← M*·x`
    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]);

    /// Dense form, when the operator is small enough to materialize.
    fn densify(&self) -> Option<DenseMatrix> {
        None
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        DenseMatrix::apply(self, x, y)
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        DenseMatrix::apply_adjoint(self, x, y)
    }

    fn densify(&self) -> Option<DenseMatrix> {
        Some(self.clone())
    }
}

pub(crate) fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
