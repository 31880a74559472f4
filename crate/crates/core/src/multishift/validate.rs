use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weights::WeightFamily;
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::linalg::DenseMatrix;

/// Relative tolerance for the commuting identity, scaled by (max norm)².
pub const COMMUTING_TOL: f64 = 1e-12;
/// Slack allowed above 1 when a family is declared contractive.
pub const CONTRACTIVE_TOL: f64 = 1e-12;

/// Weights materialized on a box: `weights[rank·d + axis]`.
pub(crate) struct Materialized {
    pub lbox: LatticeBox,
    pub d: usize,
    pub weights: Vec<DenseMatrix>,
}

impl Materialized {
    pub fn new(w: &WeightFamily, lbox: &LatticeBox) -> Result<Self> {
        let d = w.arity();
        if lbox.arity() != d {
            return Err(Error::ArityMismatch { expected: d, got: lbox.arity() });
        }
        let weights = (0..lbox.volume())
            .into_par_iter()
            .map(|r| {
                let mut alpha = vec![0; d];
                lbox.unrank_into(r, &mut alpha);
                (0..d).map(|j| w.weight_raw(&alpha, j)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        Ok(Materialized { lbox: lbox.clone(), d, weights })
    }

    pub fn get(&self, alpha: &[usize], axis: usize) -> &DenseMatrix {
        &self.weights[self.lbox.rank_unchecked(alpha) * self.d + axis]
    }
}

/// Where the largest commutation defect occurred.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectLocation {
    pub alpha: Vec<usize>,
    pub axes: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: String,
    #[serde(rename = "box")]
    pub sides: Vec<usize>,
    /// Largest ‖A_α^{(j)}‖ over α in the box and all axes.
    pub max_weight_norm: f64,
    /// Largest ‖A^{(i)}_{α+ε_j}A^{(j)}_α − A^{(j)}_{α+ε_i}A^{(i)}_α‖.
    pub max_commutation_defect: f64,
    pub tolerance: f64,
    pub worst: Option<DefectLocation>,
    pub contractive_required: bool,
    pub accepted: bool,
}

#[derive(Clone, Copy)]
struct Worst {
    defect: f64,
    rank: usize,
    pair: (usize, usize),
}

fn pick(a: Worst, b: Worst) -> Worst {
    if b.defect > a.defect || (b.defect == a.defect && (b.rank, b.pair) < (a.rank, a.pair)) {
        b
    } else {
        a
    }
}

/// Checks boundedness (max weight norm) and the commuting identity on `b`.
/// Needs weights on `b` expanded by one along every axis.
pub fn validate_weights(w: &WeightFamily, b: &LatticeBox) -> Result<ValidationReport> {
    let ext = Materialized::new(w, &b.expanded(1))?;
    validate_materialized(w, b, &ext)
}

pub(crate) fn validate_materialized(w: &WeightFamily, b: &LatticeBox, ext: &Materialized) -> Result<ValidationReport> {
    let d = w.arity();
    let norms = (0..b.volume())
        .into_par_iter()
        .map(|r| {
            let mut alpha = vec![0; d];
            b.unrank_into(r, &mut alpha);
            let mut best: f64 = 0.0;
            for j in 0..d {
                best = best.max(ext.get(&alpha, j).op_norm()?);
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_norm = norms.into_iter().fold(0.0, f64::max);

    let none = Worst { defect: 0.0, rank: usize::MAX, pair: (0, 0) };
    let worst = (0..b.volume())
        .into_par_iter()
        .map(|r| {
            let mut alpha = vec![0; d];
            b.unrank_into(r, &mut alpha);
            let mut local = none;
            for i in 0..d {
                for j in i + 1..d {
                    let mut up_i = alpha.clone();
                    up_i[i] += 1;
                    let mut up_j = alpha.clone();
                    up_j[j] += 1;
                    let lhs = ext.get(&up_j, i).matmul(ext.get(&alpha, j))?;
                    let rhs = ext.get(&up_i, j).matmul(ext.get(&alpha, i))?;
                    let defect = lhs.sub(&rhs)?.op_norm()?;
                    local = pick(local, Worst { defect, rank: r, pair: (i, j) });
                }
            }
            Ok(local)
        })
        .collect::<Result<Vec<Worst>>>()?
        .into_iter()
        .fold(none, pick);

    let tolerance = COMMUTING_TOL * max_norm * max_norm;
    let contractive_ok = !w.is_contractive_required() || max_norm <= 1.0 + CONTRACTIVE_TOL;
    Ok(ValidationReport {
        kind: w.kind().to_string(),
        sides: b.sides().to_vec(),
        max_weight_norm: max_norm,
        max_commutation_defect: worst.defect,
        tolerance,
        worst: (worst.rank != usize::MAX && worst.defect > 0.0).then(|| DefectLocation {
            alpha: b.unrank(worst.rank).expect("rank from box").entries().to_vec(),
            axes: [worst.pair.0, worst.pair.1],
        }),
        contractive_required: w.is_contractive_required(),
        accepted: worst.defect <= tolerance && contractive_ok,
    })
}
