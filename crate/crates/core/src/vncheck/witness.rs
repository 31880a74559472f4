//! Lower bounds on ‖p(A ⊗ S_b)‖ from a product test vector.
//!
//! For w in the polydisc, the truncated geometric vector κ_w(α) ∝ conj(w)^α
//! is nearly an eigenvector of every S_j*, with eigenvalue conj(w_j). So
//! p(A⊗S)*(x⊗κ_w) ≈ p(wA)*x ⊗ κ_w, and choosing x as the top right singular
//! vector of p(wA)* recovers ‖p(wA)‖ as the box grows.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::varopoulos::{varopoulos_tuple, VaropoulosConfig};
use crate::calculus::{eval_poly_on_tuple, sparse_poly_apply_adjoint};
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::linalg::{norm2, Svd};
use crate::multishift::{build_truncated_multishift, CommutingTuple, WeightFamily};
use crate::poly::MultiPoly;

/// ‖p(A⊗S_b)*(x⊗κ_w)‖, a lower bound on ‖p(A⊗S_b)‖.
pub fn witness_lower_bound(a: &CommutingTuple, w: &[C64], b: &LatticeBox, p: &MultiPoly) -> Result<f64> {
    let mats = a
        .as_dense()
        .ok_or_else(|| Error::InvalidInput("witness needs a dense tuple".into()))?;
    if w.len() != a.arity() {
        return Err(Error::ArityMismatch { expected: a.arity(), got: w.len() });
    }
    if b.arity() != a.arity() {
        return Err(Error::ArityMismatch { expected: a.arity(), got: b.arity() });
    }
    if w.iter().any(|z| z.norm() > 1.0 + 1e-12) {
        return Err(Error::InvalidInput("witness point must lie in the closed polydisc".into()));
    }
    let scaled = a.scaled(w)?;
    let pw = eval_poly_on_tuple(p, &scaled)?;
    let x = Svd::new(pw.as_dense().expect("dense tuple"))?.top_left_vector();

    let d = a.arity();
    let n = mats[0].rows();
    let mut kappa = Vec::with_capacity(b.volume());
    let mut alpha = vec![0; d];
    for r in 0..b.volume() {
        b.unrank_into(r, &mut alpha);
        let v: C64 = alpha.iter().zip(w).map(|(&e, z)| z.conj().powu(e as u32)).product();
        kappa.push(v);
    }
    let knorm = norm2(&kappa);
    if knorm == 0.0 {
        return Ok(0.0);
    }
    let mut v = Vec::with_capacity(n * b.volume());
    for k in &kappa {
        v.extend(x.iter().map(|xi| k / knorm * xi));
    }

    let t = build_truncated_multishift(&WeightFamily::constant(mats.to_vec())?, b)?;
    Ok(norm2(&sparse_poly_apply_adjoint(p, &t, &v)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub side: usize,
    pub r: f64,
    pub dim: usize,
    pub bound: f64,
}

/// p_V witness bounds on A⊗S for cubes of the given sides, w = (r, r, r)
/// with r = 1 − 2/m.
pub fn varopoulos_witness_sweep(c: f64, sides: &[usize]) -> Result<Vec<WitnessRow>> {
    let a = varopoulos_tuple(&VaropoulosConfig::new(c)?)?;
    let p = MultiPoly::varopoulos_kaijser();
    sides
        .iter()
        .map(|&m| {
            if m < 3 {
                return Err(Error::InvalidInput(format!("side {m} too small for r = 1 − 2/m")));
            }
            let r = 1.0 - 2.0 / m as f64;
            let b = LatticeBox::cube(3, m)?;
            let bound = witness_lower_bound(&a, &[C64::new(r, 0.0); 3], &b, &p)?;
            Ok(WitnessRow { side: m, r, dim: 4 * b.volume(), bound })
        })
        .collect()
}
