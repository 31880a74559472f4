use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::validate::{validate_materialized, Materialized};
use super::weights::WeightFamily;
use crate::error::{Error, Result};
use crate::json::{self, matrix_from_json, matrix_to_json, MatrixJson};
use crate::lattice::LatticeBox;
use crate::linalg::{Block, DenseMatrix, SparseBlockOperator};

/// Commutator tolerance relative to max(1, max‖T_j‖²).
pub const TUPLE_COMMUTING_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum TupleOperators {
    Dense(Vec<DenseMatrix>),
    Sparse(Vec<SparseBlockOperator>),
}

/// `{"matrices": [M, ...]}`, a dense tuple document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleJson {
    pub matrices: Vec<MatrixJson>,
}

/// d operators that commute pairwise, checked at construction.
#[derive(Clone, Debug)]
pub struct CommutingTuple {
    ops: TupleOperators,
    residual: f64,
    label: String,
}

fn block_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn slice_norm(b: &[C64], n: usize) -> Result<f64> {
    DenseMatrix::from_row_major(n, n, b.to_vec())?.op_norm()
}

/// Block Schur test: sqrt(max row sum · max column sum) of block norms.
/// Equals the operator norm when every fiber has at most one incoming and
/// one outgoing block.
fn schur_bound(blocks: &[(usize, usize, f64)], vol: usize) -> f64 {
    let mut rows = vec![0.0; vol];
    let mut cols = vec![0.0; vol];
    for &(s, t, nrm) in blocks {
        rows[t] += nrm;
        cols[s] += nrm;
    }
    let r = rows.iter().copied().fold(0.0, f64::max);
    let c = cols.iter().copied().fold(0.0, f64::max);
    (r * c).sqrt()
}

/// Upper bound on ‖T‖ for a sparse block operator; exact for shift-like
/// operators.
pub fn sparse_norm_bound(op: &SparseBlockOperator) -> Result<f64> {
    let n = op.fiber_dim();
    let list: Vec<(usize, usize, &[C64])> = op.blocks().collect();
    let norms = list
        .par_iter()
        .map(|&(s, t, b)| Ok((s, t, slice_norm(b, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(schur_bound(&norms, op.lattice_box().volume()))
}

/// Blocks of `after ∘ first`, keyed by (source, target).
fn compose(after: &SparseBlockOperator, first: &SparseBlockOperator) -> BTreeMap<(usize, usize), Vec<C64>> {
    let n = first.fiber_dim();
    let mut out: BTreeMap<(usize, usize), Vec<C64>> = BTreeMap::new();
    for (s, t, b1) in first.blocks() {
        for (u, b2) in after.blocks_from(t) {
            let prod = block_mul(b2, b1, n);
            match out.get_mut(&(s, u)) {
                Some(acc) => acc.iter_mut().zip(&prod).for_each(|(a, p)| *a += p),
                None => {
                    out.insert((s, u), prod);
                }
            }
        }
    }
    out
}

fn sparse_commutator_bound(a: &SparseBlockOperator, b: &SparseBlockOperator) -> Result<f64> {
    let n = a.fiber_dim();
    let mut diff = compose(a, b);
    for (key, blk) in compose(b, a) {
        let acc = diff.entry(key).or_insert_with(|| vec![C64::new(0.0, 0.0); n * n]);
        acc.iter_mut().zip(&blk).for_each(|(x, y)| *x -= y);
    }
    let entries: Vec<_> = diff.into_iter().collect();
    let norms = entries
        .par_iter()
        .map(|((s, u), blk)| Ok((*s, *u, slice_norm(blk, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(schur_bound(&norms, a.lattice_box().volume()))
}

impl CommutingTuple {
    pub fn dense(mats: Vec<DenseMatrix>) -> Result<Self> {
        let first = mats.first().ok_or_else(|| Error::InvalidInput("empty tuple".into()))?;
        let k = first.rows();
        if mats.iter().any(|m| m.rows() != k || m.cols() != k) {
            return Err(Error::ShapeMismatch("tuple operators must be square and of equal size".into()));
        }
        let mut max_norm: f64 = 0.0;
        for m in &mats {
            max_norm = max_norm.max(m.op_norm()?);
        }
        let mut residual: f64 = 0.0;
        for i in 0..mats.len() {
            for j in i + 1..mats.len() {
                let c = mats[i].matmul(&mats[j])?.sub(&mats[j].matmul(&mats[i])?)?;
                residual = residual.max(c.op_norm()?);
            }
        }
        Self::checked(TupleOperators::Dense(mats), residual, max_norm)
    }

    /// Parses a dense tuple document; malformed entries name their JSON path.
    pub fn parse_dense(text: &str) -> Result<Self> {
        let doc: TupleJson = json::from_str(text)?;
        if doc.matrices.is_empty() {
            return Err(Error::malformed("matrices", "at least one matrix is required"));
        }
        let mats = doc
            .matrices
            .iter()
            .enumerate()
            .map(|(j, m)| matrix_from_json(m, &format!("matrices[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        Self::dense(mats)
    }

    /// Dense tuples only.
    pub fn to_json(&self) -> Option<TupleJson> {
        self.as_dense().map(|mats| TupleJson { matrices: mats.iter().map(matrix_to_json).collect() })
    }

    pub fn sparse(ops: Vec<SparseBlockOperator>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidInput("empty tuple".into()))?;
        if ops
            .iter()
            .any(|o| o.lattice_box() != first.lattice_box() || o.fiber_dim() != first.fiber_dim())
        {
            return Err(Error::ShapeMismatch("sparse tuple operators must share box and fiber dimension".into()));
        }
        let mut max_norm: f64 = 0.0;
        for o in &ops {
            max_norm = max_norm.max(sparse_norm_bound(o)?);
        }
        let mut residual: f64 = 0.0;
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                residual = residual.max(sparse_commutator_bound(&ops[i], &ops[j])?);
            }
        }
        Self::checked(TupleOperators::Sparse(ops), residual, max_norm)
    }

    fn checked(ops: TupleOperators, residual: f64, max_norm: f64) -> Result<Self> {
        let tolerance = TUPLE_COMMUTING_TOL * (max_norm * max_norm).max(1.0);
        if residual > tolerance {
            return Err(Error::NotCommuting { residual, tolerance });
        }
        Ok(CommutingTuple { ops, residual, label: String::new() })
    }

    /// d copies of the k×k identity.
    pub fn identity(d: usize, k: usize) -> Self {
        CommutingTuple {
            ops: TupleOperators::Dense(vec![DenseMatrix::identity(k); d]),
            residual: 0.0,
            label: format!("identity({d}, {k})"),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn operators(&self) -> &TupleOperators {
        &self.ops
    }

    pub fn as_dense(&self) -> Option<&[DenseMatrix]> {
        match &self.ops {
            TupleOperators::Dense(m) => Some(m),
            TupleOperators::Sparse(_) => None,
        }
    }

    pub fn as_sparse(&self) -> Option<&[SparseBlockOperator]> {
        match &self.ops {
            TupleOperators::Sparse(s) => Some(s),
            TupleOperators::Dense(_) => None,
        }
    }

    pub fn arity(&self) -> usize {
        match &self.ops {
            TupleOperators::Dense(m) => m.len(),
            TupleOperators::Sparse(s) => s.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.ops {
            TupleOperators::Dense(m) => m[0].rows(),
            TupleOperators::Sparse(s) => s[0].dim(),
        }
    }

    /// max_{i<j} ‖T_iT_j − T_jT_i‖ (an upper bound for sparse tuples).
    pub fn commutation_residual(&self) -> f64 {
        self.residual
    }

    /// ‖T_j‖ for dense tuples; a block upper bound, exact for multishift
    /// truncations, for sparse ones.
    pub fn norms(&self) -> Result<Vec<f64>> {
        match &self.ops {
            TupleOperators::Dense(m) => m.iter().map(DenseMatrix::op_norm).collect(),
            TupleOperators::Sparse(s) => s.iter().map(sparse_norm_bound).collect(),
        }
    }

    pub fn densified(&self) -> Result<CommutingTuple> {
        match &self.ops {
            TupleOperators::Dense(_) => Ok(self.clone()),
            TupleOperators::Sparse(s) => Ok(CommutingTuple {
                ops: TupleOperators::Dense(s.iter().map(SparseBlockOperator::to_dense).collect::<Result<_>>()?),
                residual: self.residual,
                label: self.label.clone(),
            }),
        }
    }

    /// (w_1 T_1, …, w_d T_d) for a dense tuple.
    pub fn scaled(&self, w: &[C64]) -> Result<CommutingTuple> {
        let mats = self
            .as_dense()
            .ok_or_else(|| Error::InvalidInput("scaling needs a dense tuple".into()))?;
        if w.len() != mats.len() {
            return Err(Error::ArityMismatch { expected: mats.len(), got: w.len() });
        }
        Ok(CommutingTuple {
            ops: TupleOperators::Dense(mats.iter().zip(w).map(|(m, &s)| m.scale(s)).collect()),
            residual: self.residual * w.iter().map(|z| z.norm()).fold(0.0, f64::max).powi(2),
            label: self.label.clone(),
        })
    }

    /// Hash of the operator entries, stable within one build.
    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        let mut eat = |z: &C64| {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        };
        match &self.ops {
            TupleOperators::Dense(m) => m.iter().flat_map(|m| m.as_slice()).for_each(&mut eat),
            TupleOperators::Sparse(s) => {
                for op in s {
                    for (src, tgt, b) in op.blocks() {
                        eat(&C64::new(src as f64, tgt as f64));
                        b.iter().for_each(&mut eat);
                    }
                }
            }
        }
        h.finish()
    }
}

/// The compression of the weighted multishift to the fibers of `b`: T_j
/// maps fiber α to α+ε_j through A_α^{(j)} whenever α+ε_j stays in `b`.
pub fn build_truncated_multishift(w: &WeightFamily, b: &LatticeBox) -> Result<CommutingTuple> {
    let ext = Materialized::new(w, &b.expanded(1))?;
    let report = validate_materialized(w, b, &ext)?;
    if !report.accepted {
        return Err(Error::WeightsRejected(format!(
            "commutation defect {:.3e} (tolerance {:.3e}), max weight norm {:.6}",
            report.max_commutation_defect, report.tolerance, report.max_weight_norm
        )));
    }
    let d = w.arity();
    let n = w.fiber_dim();
    let mut ops = Vec::with_capacity(d);
    let mut alpha = vec![0; d];
    for j in 0..d {
        let mut blocks = Vec::new();
        for r in 0..b.volume() {
            b.unrank_into(r, &mut alpha);
            if let Some(t) = b.rank_step_up(&alpha, j) {
                blocks.push(Block { source: r, target: t, matrix: ext.get(&alpha, j).clone() });
            }
        }
        ops.push(SparseBlockOperator::new(b.clone(), n, blocks)?);
    }
    Ok(CommutingTuple::sparse(ops)?.with_label(format!("{} multishift on box {:?}", w.kind(), b.sides())))
}

/// Componentwise Kronecker products (A_1⊗B_1, …, A_d⊗B_d).
pub fn tensor_tuple(a: &CommutingTuple, b: &CommutingTuple) -> Result<CommutingTuple> {
    if a.arity() != b.arity() {
        return Err(Error::ArityMismatch { expected: a.arity(), got: b.arity() });
    }
    let (Some(am), Some(bm)) = (a.as_dense(), b.as_dense()) else {
        return Err(Error::InvalidInput("tensor_tuple needs dense tuples".into()));
    };
    let mats = am.iter().zip(bm).map(|(x, y)| x.kron(y)).collect();
    Ok(CommutingTuple::dense(mats)?.with_label(format!("({}) ⊗ ({})", a.label(), b.label())))
}

/// Dense truncated unweighted shifts S_j on ℓ²(b): e_α ↦ e_{α+ε_j}.
pub fn truncated_unweighted_shift(b: &LatticeBox) -> Result<CommutingTuple> {
    let vol = b.volume();
    if vol > crate::linalg::DENSE_DIM_LIMIT {
        return Err(Error::DimensionTooLarge(vol));
    }
    let mut mats = vec![DenseMatrix::zeros(vol, vol); b.arity()];
    for (r, alpha) in b.iter().enumerate() {
        for (j, m) in mats.iter_mut().enumerate() {
            if let Some(t) = b.rank_step_up(alpha.entries(), j) {
                m[(t, r)] = C64::new(1.0, 0.0);
            }
        }
    }
    Ok(CommutingTuple::dense(mats)?.with_label(format!("unweighted shift on box {:?}", b.sides())))
}

/// Reorders a matrix on ℂⁿ ⊗ ℓ²(box) (index i·vol + rank) into the
/// fiber-major layout of sparse operators (index rank·n + i).
pub fn kron_to_fiber_major(m: &DenseMatrix, n: usize, vol: usize) -> Result<DenseMatrix> {
    if m.rows() != n * vol || m.cols() != n * vol {
        return Err(Error::DimensionMismatch { expected: n * vol, got: m.rows() });
    }
    let pos = |k: usize| (k % vol) * n + k / vol;
    let mut out = DenseMatrix::zeros(n * vol, n * vol);
    for i in 0..n * vol {
        for j in 0..n * vol {
            out[(pos(i), pos(j))] = m[(i, j)];
        }
    }
    Ok(out)
}
