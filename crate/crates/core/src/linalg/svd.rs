//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! Column pairs of a working copy are rotated until mutually orthogonal;
//! the column norms are then the singular values. For wide inputs the
//! adjoint is processed instead so the number of columns never exceeds
//! the number of rows.

use num_complex::Complex64 as C64;

use super::dense::DenseMatrix;
use crate::error::Result;

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-15;

/// Thin SVD `M = U·diag(σ)·V*` with σ sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// Left singular vectors, one per column (`rows × k`).
    pub u: DenseMatrix,
    /// Right singular vectors, one per column (`cols × k`).
    pub v: DenseMatrix,
}

impl Svd {
    pub fn new(m: &DenseMatrix) -> Result<Svd> {
        if m.cols() > m.rows() {
            let t = jacobi(&m.adjoint(), true);
            return Ok(Svd {
                singular_values: t.singular_values,
                u: t.v,
                v: t.u,
            });
        }
        Ok(jacobi(m, true))
    }

    /// Singular values only (no vector accumulation).
    pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
        let src = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
        Ok(jacobi(&src, false).singular_values)
    }

    pub fn top_right_vector(&self) -> Vec<C64> {
        (0..self.v.rows()).map(|i| self.v[(i, 0)]).collect()
    }

    pub fn top_left_vector(&self) -> Vec<C64> {
        (0..self.u.rows()).map(|i| self.u[(i, 0)]).collect()
    }
}

fn jacobi(m: &DenseMatrix, want_vectors: bool) -> Svd {
    let (rows, cols) = (m.rows(), m.cols());
    // column-major working copy
    let mut a: Vec<Vec<C64>> = (0..cols).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<C64>> = if want_vectors {
        (0..cols)
            .map(|j| {
                let mut e = vec![C64::new(0.0, 0.0); cols];
                e[j] = C64::new(1.0, 0.0);
                e
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut norms: Vec<f64> = a.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                if want_vectors {
                    rotate(&mut v, p, q, c, s, phase);
                }
                norms[p] = a[p].iter().map(|z| z.norm_sqr()).sum();
                norms[q] = a[q].iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j].sqrt()).collect();

    if !want_vectors {
        return Svd {
            singular_values,
            u: DenseMatrix::zeros(0, 0),
            v: DenseMatrix::zeros(0, 0),
        };
    }
    let mut u_mat = DenseMatrix::zeros(rows, cols);
    let mut v_mat = DenseMatrix::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        let sigma = singular_values[k];
        for i in 0..rows {
            u_mat[(i, k)] = if sigma > 0.0 { a[j][i] / sigma } else { C64::new(0.0, 0.0) };
        }
        for i in 0..cols {
            v_mat[(i, k)] = v[j][i];
        }
    }
    Svd {
        singular_values,
        u: u_mat,
        v: v_mat,
    }
}

/// Applies the plane rotation that orthogonalizes columns p and q:
/// with q̃ = conj(phase)·q, (p, q̃) ← (c·p − s·q̃, s·p + c·q̃), then q = phase·q̃.
fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    let pc = phase.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yt = pc * *y;
        let nx = *x * c - yt * s;
        let ny = *x * s + yt * c;
        *x = nx;
        *y = phase * ny;
    }
}
