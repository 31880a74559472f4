use serde::{Deserialize, Serialize};

use super::validate::Materialized;
use super::weights::WeightFamily;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, MultiIndex};
use crate::linalg::{Block, DenseMatrix, SparseBlockOperator};

/// Largest ‖A*A − I‖ accepted for input weights.
pub const WEIGHT_UNITARITY_TOL: f64 = 1e-12;
pub const PATH_TOL: f64 = 1e-10;
pub const BLOCK_UNITARITY_TOL: f64 = 1e-10;
pub const INTERTWINING_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwinerReport {
    #[serde(rename = "box")]
    pub sides: Vec<usize>,
    pub fiber_dim: usize,
    /// Largest disagreement between recursions arriving along different axes.
    pub path_defect: f64,
    /// Largest ‖U_α*U_α − I‖.
    pub unitarity_defect: f64,
    /// Largest ‖U_{α+ε_j}A_α^{(j)} − Ã_α^{(j)}U_α‖ over interior fibers.
    pub intertwining_residual: f64,
    pub within_tolerance: bool,
}

/// Block-diagonal unitary U = ⊕ U_α with U T_j = T̃_j U on the box.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    lbox: LatticeBox,
    blocks: Vec<DenseMatrix>,
    report: IntertwinerReport,
}

impl Intertwiner {
    pub fn block(&self, alpha: &MultiIndex) -> Result<&DenseMatrix> {
        Ok(&self.blocks[self.lbox.rank(alpha)?])
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn report(&self) -> &IntertwinerReport {
        &self.report
    }

    pub fn to_operator(&self) -> Result<SparseBlockOperator> {
        let n = self.report.fiber_dim;
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(r, m)| Block { source: r, target: r, matrix: m.clone() })
            .collect();
        SparseBlockOperator::new(self.lbox.clone(), n, blocks)
    }
}

fn check_unitary(w: &WeightFamily, b: &LatticeBox, m: &Materialized, which: &str) -> Result<()> {
    let mut alpha = vec![0; b.arity()];
    for r in 0..b.volume() {
        b.unrank_into(r, &mut alpha);
        for j in 0..w.arity() {
            let defect = m.get(&alpha, j).unitarity_defect()?;
            if defect > WEIGHT_UNITARITY_TOL {
                return Err(Error::NonUnitaryWeights(format!(
                    "{which} family: ‖A*A − I‖ = {defect:.3e} at α = {alpha:?}, axis {j}"
                )));
            }
        }
    }
    Ok(())
}

/// Solves U_0 = I, U_{α+ε_j} = Ã_α^{(j)} U_α A_α^{(j)*} over `b` in rank
/// order and measures how well the result intertwines the truncations.
/// Families that break the commuting identity surface as `PathDependence`.
pub fn unitary_intertwiner(w: &WeightFamily, wt: &WeightFamily, b: &LatticeBox) -> Result<Intertwiner> {
    if w.arity() != wt.arity() {
        return Err(Error::ArityMismatch { expected: w.arity(), got: wt.arity() });
    }
    if w.fiber_dim() != wt.fiber_dim() {
        return Err(Error::DimensionMismatch { expected: w.fiber_dim(), got: wt.fiber_dim() });
    }
    let ext = b.expanded(1);
    let ma = Materialized::new(w, &ext)?;
    let mb = Materialized::new(wt, &ext)?;
    check_unitary(w, b, &ma, "first")?;
    check_unitary(wt, b, &mb, "second")?;

    let d = w.arity();
    let n = w.fiber_dim();
    let mut blocks: Vec<DenseMatrix> = Vec::with_capacity(b.volume());
    let mut path_defect: f64 = 0.0;
    let mut alpha = vec![0; d];
    for r in 0..b.volume() {
        b.unrank_into(r, &mut alpha);
        let mut first: Option<DenseMatrix> = None;
        for j in 0..d {
            if alpha[j] == 0 {
                continue;
            }
            let mut prev = alpha.clone();
            prev[j] -= 1;
            let up = &blocks[b.rank_unchecked(&prev)];
            let cand = mb.get(&prev, j).matmul(up)?.matmul(&ma.get(&prev, j).adjoint())?;
            match &first {
                None => first = Some(cand),
                Some(f) => {
                    let defect = cand.sub(f)?.op_norm()?;
                    path_defect = path_defect.max(defect);
                    if defect > PATH_TOL {
                        return Err(Error::PathDependence { defect, at: format!("{alpha:?}") });
                    }
                }
            }
        }
        blocks.push(first.unwrap_or_else(|| DenseMatrix::identity(n)));
    }

    let mut unitarity_defect: f64 = 0.0;
    for u in &blocks {
        unitarity_defect = unitarity_defect.max(u.unitarity_defect()?);
    }
    let mut intertwining_residual: f64 = 0.0;
    for r in 0..b.volume() {
        b.unrank_into(r, &mut alpha);
        for j in 0..d {
            if let Some(t) = b.rank_step_up(&alpha, j) {
                let lhs = blocks[t].matmul(ma.get(&alpha, j))?;
                let rhs = mb.get(&alpha, j).matmul(&blocks[r])?;
                intertwining_residual = intertwining_residual.max(lhs.sub(&rhs)?.op_norm()?);
            }
        }
    }
    let report = IntertwinerReport {
        sides: b.sides().to_vec(),
        fiber_dim: n,
        path_defect,
        unitarity_defect,
        intertwining_residual,
        within_tolerance: path_defect <= PATH_TOL
            && unitarity_defect <= BLOCK_UNITARITY_TOL
            && intertwining_residual <= INTERTWINING_TOL,
    };
    Ok(Intertwiner { lbox: b.clone(), blocks, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearOperator;
    use crate::multishift::build_truncated_multishift;
    use crate::sampling::random_unitary;
    use num_complex::Complex64 as C64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_family_gives_identity() {
        let w = WeightFamily::seeded_unitary(2, 3, 5).unwrap();
        let u = unitary_intertwiner(&w, &w, &LatticeBox::new(vec![3, 3]).unwrap()).unwrap();
        for blk in u.blocks() {
            assert!(blk.sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn identity_to_constant_unitary_gives_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = random_unitary(&mut rng, 3);
        let w = WeightFamily::unweighted(2, 3).unwrap();
        let wt = WeightFamily::constant(vec![q.clone(), q.clone()]).unwrap();
        let b = LatticeBox::new(vec![3, 4]).unwrap();
        let u = unitary_intertwiner(&w, &wt, &b).unwrap();
        for alpha in b.iter() {
            let mut power = DenseMatrix::identity(3);
            for _ in 0..alpha.degree() {
                power = &q * &power;
            }
            assert!(u.block(&alpha).unwrap().sub(&power).unwrap().op_norm().unwrap() < 1e-12);
        }
        assert!(u.report().within_tolerance);
    }

    #[test]
    fn seeded_pair_intertwines_operators() {
        let w = WeightFamily::seeded_unitary(3, 2, 1).unwrap();
        let wt = WeightFamily::seeded_unitary(3, 2, 2).unwrap();
        let b = LatticeBox::new(vec![4, 4, 4]).unwrap();
        let u = unitary_intertwiner(&w, &wt, &b).unwrap();
        assert!(u.report().within_tolerance, "{:?}", u.report());
        // U T_j x = T̃_j U x on a random vector, via the sparse operators
        let t = build_truncated_multishift(&w, &b).unwrap();
        let tt = build_truncated_multishift(&wt, &b).unwrap();
        let op = u.to_operator().unwrap();
        let dim = op.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x: Vec<C64> = (0..dim).map(|_| crate::sampling::complex_gaussian(&mut rng)).collect();
        for j in 0..3 {
            let (mut a, mut b1, mut c, mut e) = (vec![C64::default(); dim], vec![C64::default(); dim], vec![C64::default(); dim], vec![C64::default(); dim]);
            t.as_sparse().unwrap()[j].apply(&x, &mut a);
            op.apply(&a, &mut b1);
            op.apply(&x, &mut c);
            tt.as_sparse().unwrap()[j].apply(&c, &mut e);
            let err = b1.iter().zip(&e).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn non_unitary_weights_are_rejected() {
        let w = WeightFamily::constant(vec![DenseMatrix::identity(2).scale(C64::new(0.5, 0.0))]).unwrap();
        let wt = WeightFamily::unweighted(1, 2).unwrap();
        let r = unitary_intertwiner(&w, &wt, &LatticeBox::new(vec![3]).unwrap());
        assert!(matches!(r, Err(Error::NonUnitaryWeights(_))));
    }

    #[test]
    fn non_commuting_unitaries_are_path_dependent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_unitary(&mut rng, 2);
        let q = random_unitary(&mut rng, 2);
        let w = WeightFamily::unweighted(2, 2).unwrap();
        let wt = WeightFamily::constant(vec![p, q]).unwrap();
        let r = unitary_intertwiner(&w, &wt, &LatticeBox::new(vec![2, 2]).unwrap());
        assert!(matches!(r, Err(Error::PathDependence { .. })), "{r:?}");
    }
}
