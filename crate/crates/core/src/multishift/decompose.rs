use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tuple::{build_truncated_multishift, CommutingTuple};
use super::weights::WeightFamily;
use crate::calculus::eval_poly_on_tuple;
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::linalg::{NormRegistry, PowerIterationConfig};
use crate::poly::MultiPoly;
use crate::sampling::random_poly;

/// Largest accepted |‖p(T)‖ − max_k ‖p(W_k)‖|.
pub const NORM_EQUALITY_TOL: f64 = 1e-8;

/// A diagonal family split into its n classical coordinate families.
#[derive(Clone, Debug)]
pub struct DiagonalDecomposition {
    lbox: LatticeBox,
    family: WeightFamily,
    components: Vec<WeightFamily>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub polynomial: String,
    pub full_norm: f64,
    pub component_norms: Vec<f64>,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub entries: Vec<CertificateEntry>,
    pub max_gap: f64,
    pub tolerance: f64,
    pub exact_norms: bool,
    pub passed: bool,
}

/// Splits a `diagonal` (or `classical`) family into its coordinate families.
pub fn decompose_diagonal(w: &WeightFamily, b: &LatticeBox) -> Result<DiagonalDecomposition> {
    let comps = w
        .rule()
        .diagonal_components()
        .ok_or_else(|| Error::NotDiagonalRule(w.kind().to_string()))?;
    if b.arity() != w.arity() {
        return Err(Error::ArityMismatch { expected: w.arity(), got: b.arity() });
    }
    let components = comps
        .iter()
        .map(|c| WeightFamily::classical(c.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagonalDecomposition { lbox: b.clone(), family: w.clone(), components })
}

impl DiagonalDecomposition {
    pub fn components(&self) -> &[WeightFamily] {
        &self.components
    }

    pub fn lattice_box(&self) -> &LatticeBox {
        &self.lbox
    }

    /// Position in ⊕_k ℓ²(box) (index k·vol + rank) of each coordinate of
    /// ℓ²_{ℂⁿ}(box) (index rank·n + k).
    pub fn permutation(&self) -> Vec<usize> {
        let n = self.components.len();
        let vol = self.lbox.volume();
        (0..n * vol).map(|i| (i % n) * vol + i / n).collect()
    }

    /// Compares ‖p(T_box)‖ with max_k ‖p(W_k,box)‖ for each polynomial.
    pub fn certify(&self, polys: &[MultiPoly], power: &PowerIterationConfig) -> Result<NormCertificate> {
        let full = build_truncated_multishift(&self.family, &self.lbox)?;
        let parts = self
            .components
            .iter()
            .map(|c| build_truncated_multishift(c, &self.lbox))
            .collect::<Result<Vec<_>>>()?;
        let estimator = NormRegistry::with_builtins().create("auto", power)?;
        let mut exact = true;
        let mut norm = |t: &CommutingTuple, p: &MultiPoly| -> Result<f64> {
            let est = estimator.estimate(&eval_poly_on_tuple(p, t)?)?;
            exact &= est.is_exact();
            Ok(est.value)
        };
        let mut entries = Vec::with_capacity(polys.len());
        for p in polys {
            let full_norm = norm(&full, p)?;
            let component_norms = parts.iter().map(|t| norm(t, p)).collect::<Result<Vec<_>>>()?;
            let best = component_norms.iter().copied().fold(0.0, f64::max);
            entries.push(CertificateEntry {
                polynomial: p.describe(),
                full_norm,
                component_norms,
                gap: (full_norm - best).abs(),
            });
        }
        let max_gap = entries.iter().map(|e| e.gap).fold(0.0, f64::max);
        Ok(NormCertificate {
            entries,
            max_gap,
            tolerance: NORM_EQUALITY_TOL,
            exact_norms: exact,
            passed: max_gap <= NORM_EQUALITY_TOL,
        })
    }
}

/// The coordinate polynomials z_j plus `count` seeded random polynomials of
/// degree ≤ 4.
pub fn certificate_polynomials(d: usize, count: usize, seed: u64) -> Vec<MultiPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d)
        .map(|j| MultiPoly::coordinate(d, j))
        .chain((0..count).map(|_| random_poly(&mut rng, d, 4)))
        .collect()
}
