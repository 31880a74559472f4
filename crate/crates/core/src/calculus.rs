//! Polynomial functional calculus p(T) for commuting tuples.
//!
//! Monomials are organized as a tree in which the parent of α is α − ε_j
//! for the first nonzero axis j, so every T^α costs one product (dense) or
//! one sparse matvec (matrix-free) on top of its parent.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::MultiIndex;
use crate::linalg::{DenseMatrix, LinearOperator, SparseBlockOperator};
use crate::multishift::{CommutingTuple, TupleOperators};
use crate::poly::{MatrixPoly, MultiPoly};

type StepFn<'a> = dyn Fn(usize, &[C64], &mut [C64]) + 'a;
type VisitFn<'a> = dyn FnMut(usize, &[C64]) + 'a;

/// Monomial tree rooted at α = 0. Children of a node with first nonzero
/// axis f are reached by stepping up along axes j ≤ f.
#[derive(Clone, Debug)]
struct MonomialTree {
    nodes: Vec<Node>,
}

#[derive(Clone, Debug)]
struct Node {
    /// Index of the coefficient in the term list, if α is a term.
    term: Option<usize>,
    /// (axis, child node)
    children: Vec<(usize, usize)>,
}

impl MonomialTree {
    fn new(d: usize, monomials: &[&MultiIndex]) -> Self {
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut nodes = vec![Node { term: None, children: Vec::new() }];
        index.insert(vec![0; d], 0);
        for (t, alpha) in monomials.iter().enumerate() {
            // walk from the root to α by raising the last axis first, so
            // each step lowers the first nonzero axis of the remainder
            let mut cur = vec![0; d];
            let mut node = 0;
            for j in (0..d).rev() {
                for _ in 0..alpha.entries()[j] {
                    cur[j] += 1;
                    node = match index.get(&cur) {
                        Some(&k) => k,
                        None => {
                            let k = nodes.len();
                            nodes.push(Node { term: None, children: Vec::new() });
                            nodes[node].children.push((j, k));
                            index.insert(cur.clone(), k);
                            k
                        }
                    };
                }
            }
            nodes[node].term = Some(t);
        }
        MonomialTree { nodes }
    }

    /// Depth-first walk calling `visit(term, T^α x)` at every term node;
    /// `step(axis, v, out)` must write T_axis v (or its adjoint) into out.
    fn walk(
        &self,
        x: &[C64],
        step: &StepFn<'_>,
        visit: &mut VisitFn<'_>,
    ) {
        self.walk_from(0, x, step, visit);
    }

    fn walk_from(
        &self,
        node: usize,
        v: &[C64],
        step: &StepFn<'_>,
        visit: &mut VisitFn<'_>,
    ) {
        if let Some(t) = self.nodes[node].term {
            visit(t, v);
        }
        if self.nodes[node].children.is_empty() {
            return;
        }
        let mut buf = vec![C64::new(0.0, 0.0); v.len()];
        for &(axis, child) in &self.nodes[node].children {
            step(axis, v, &mut buf);
            self.walk_from(child, &buf, step, visit);
        }
    }

    fn dense_powers(&self, mats: &[DenseMatrix], visit: &mut dyn FnMut(usize, &DenseMatrix)) {
        let k = mats[0].rows();
        self.dense_from(0, &DenseMatrix::identity(k), mats, visit);
    }

    fn dense_from(&self, node: usize, power: &DenseMatrix, mats: &[DenseMatrix], visit: &mut dyn FnMut(usize, &DenseMatrix)) {
        if let Some(t) = self.nodes[node].term {
            visit(t, power);
        }
        for &(axis, child) in &self.nodes[node].children {
            let next = &mats[axis] * power;
            self.dense_from(child, &next, mats, visit);
        }
    }
}

#[derive(Clone, Debug)]
enum Coefficients {
    Scalar(Vec<C64>),
    /// m×m blocks; the operator acts on ℂ^m ⊗ H with index i·dim + x.
    Matrix(usize, Vec<DenseMatrix>),
}

/// Matrix-free p(T) over a sparse tuple.
#[derive(Clone, Debug)]
pub struct SparsePolyOperator<'a> {
    ops: &'a [SparseBlockOperator],
    tree: MonomialTree,
    coeffs: Coefficients,
}

impl SparsePolyOperator<'_> {
    fn base_dim(&self) -> usize {
        self.ops[0].dim()
    }

    fn blocks(&self) -> usize {
        match &self.coeffs {
            Coefficients::Scalar(_) => 1,
            Coefficients::Matrix(m, _) => *m,
        }
    }

    fn run(&self, x: &[C64], y: &mut [C64], adjoint: bool) {
        let n = self.base_dim();
        let step = |axis: usize, v: &[C64], out: &mut [C64]| {
            if adjoint {
                self.ops[axis].apply_adjoint(v, out)
            } else {
                self.ops[axis].apply(v, out)
            }
        };
        y.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        match &self.coeffs {
            Coefficients::Scalar(c) => {
                self.tree.walk(x, &step, &mut |t, v| {
                    let a = if adjoint { c[t].conj() } else { c[t] };
                    y.iter_mut().zip(v).for_each(|(o, z)| *o += a * z);
                });
            }
            Coefficients::Matrix(m, blocks) => {
                for k in 0..*m {
                    let xk = &x[k * n..(k + 1) * n];
                    self.tree.walk(xk, &step, &mut |t, v| {
                        for i in 0..*m {
                            // (A ⊗ T^α) block (i,k) is A[i,k]·T^α; adjoint uses conj(A[k,i])
                            let a = if adjoint { blocks[t][(k, i)].conj() } else { blocks[t][(i, k)] };
                            if a == C64::new(0.0, 0.0) {
                                continue;
                            }
                            y[i * n..(i + 1) * n].iter_mut().zip(v).for_each(|(o, z)| *o += a * z);
                        }
                    });
                }
            }
        }
    }
}

impl LinearOperator for SparsePolyOperator<'_> {
    fn dim(&self) -> usize {
        self.blocks() * self.base_dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.run(x, y, false)
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        self.run(x, y, true)
    }

    fn densify(&self) -> Option<DenseMatrix> {
        let dim = self.dim();
        if dim > crate::linalg::DENSE_DIM_LIMIT {
            return None;
        }
        let mut m = DenseMatrix::zeros(dim, dim);
        let mut e = vec![C64::new(0.0, 0.0); dim];
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            e[j] = C64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            e[j] = C64::new(0.0, 0.0);
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        Some(m)
    }
}

#[derive(Clone, Debug)]
pub enum PolyOperator<'a> {
    Dense(DenseMatrix),
    Sparse(SparsePolyOperator<'a>),
}

/// p(T) in the representation of T, with identifying hashes.
#[derive(Clone, Debug)]
pub struct OperatorPolynomialValue<'a> {
    pub operator: PolyOperator<'a>,
    pub poly_hash: u64,
    pub tuple_hash: u64,
}

impl OperatorPolynomialValue<'_> {
    pub fn as_dense(&self) -> Option<&DenseMatrix> {
        match &self.operator {
            PolyOperator::Dense(m) => Some(m),
            PolyOperator::Sparse(_) => None,
        }
    }
}

impl LinearOperator for OperatorPolynomialValue<'_> {
    fn dim(&self) -> usize {
        match &self.operator {
            PolyOperator::Dense(m) => m.rows(),
            PolyOperator::Sparse(s) => s.dim(),
        }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        match &self.operator {
            PolyOperator::Dense(m) => m.apply(x, y),
            PolyOperator::Sparse(s) => s.apply(x, y),
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        match &self.operator {
            PolyOperator::Dense(m) => m.apply_adjoint(x, y),
            PolyOperator::Sparse(s) => s.apply_adjoint(x, y),
        }
    }

    fn densify(&self) -> Option<DenseMatrix> {
        match &self.operator {
            PolyOperator::Dense(m) => Some(m.clone()),
            PolyOperator::Sparse(s) => s.densify(),
        }
    }
}

fn text_hash(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

fn check_arity(expected: usize, t: &CommutingTuple) -> Result<()> {
    if t.arity() != expected {
        return Err(Error::ArityMismatch { expected: t.arity(), got: expected });
    }
    Ok(())
}

/// Σ a_α T^α.
pub fn eval_poly_on_tuple<'a>(p: &MultiPoly, t: &'a CommutingTuple) -> Result<OperatorPolynomialValue<'a>> {
    check_arity(p.arity(), t)?;
    let monomials: Vec<&MultiIndex> = p.terms().iter().map(|(a, _)| a).collect();
    let tree = MonomialTree::new(p.arity(), &monomials);
    let coeffs: Vec<C64> = p.terms().iter().map(|(_, c)| *c).collect();
    let operator = match t.operators() {
        TupleOperators::Dense(mats) => {
            let k = mats[0].rows();
            let mut acc = DenseMatrix::zeros(k, k);
            tree.dense_powers(mats, &mut |i, pow| {
                acc.add_scaled_assign(coeffs[i], pow).expect("square powers");
            });
            PolyOperator::Dense(acc)
        }
        TupleOperators::Sparse(ops) => PolyOperator::Sparse(SparsePolyOperator {
            ops,
            tree,
            coeffs: Coefficients::Scalar(coeffs),
        }),
    };
    Ok(OperatorPolynomialValue {
        operator,
        poly_hash: text_hash(&p.describe()),
        tuple_hash: t.content_hash(),
    })
}

/// Σ A_α ⊗ T^α on ℂ^m ⊗ H; block (i, j) is p_ij(T).
pub fn eval_matrix_poly_on_tuple<'a>(p: &MatrixPoly, t: &'a CommutingTuple) -> Result<OperatorPolynomialValue<'a>> {
    check_arity(p.arity(), t)?;
    let monomials: Vec<&MultiIndex> = p.terms().iter().map(|(a, _)| a).collect();
    let tree = MonomialTree::new(p.arity(), &monomials);
    let blocks: Vec<DenseMatrix> = p.terms().iter().map(|(_, c)| c.clone()).collect();
    let m = p.block_size();
    let operator = match t.operators() {
        TupleOperators::Dense(mats) => {
            let k = mats[0].rows();
            let mut acc = DenseMatrix::zeros(m * k, m * k);
            tree.dense_powers(mats, &mut |i, pow| {
                acc.add_scaled_assign(C64::new(1.0, 0.0), &blocks[i].kron(pow))
                    .expect("uniform block size");
            });
            PolyOperator::Dense(acc)
        }
        TupleOperators::Sparse(ops) => PolyOperator::Sparse(SparsePolyOperator {
            ops,
            tree,
            coeffs: Coefficients::Matrix(m, blocks),
        }),
    };
    Ok(OperatorPolynomialValue {
        operator,
        poly_hash: text_hash(&p.describe()),
        tuple_hash: t.content_hash(),
    })
}

fn sparse_apply(p: &MultiPoly, t: &CommutingTuple, v: &[C64], adjoint: bool) -> Result<Vec<C64>> {
    if t.as_sparse().is_none() {
        return Err(Error::InvalidInput("sparse application needs a sparse tuple".into()));
    }
    if v.len() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), got: v.len() });
    }
    let value = eval_poly_on_tuple(p, t)?;
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    if adjoint {
        value.apply_adjoint(v, &mut out);
    } else {
        value.apply(v, &mut out);
    }
    Ok(out)
}

/// p(T)·v without forming p(T).
pub fn sparse_poly_apply(p: &MultiPoly, t: &CommutingTuple, v: &[C64]) -> Result<Vec<C64>> {
    sparse_apply(p, t, v, false)
}

/// p(T)*·v without forming p(T).
pub fn sparse_poly_apply_adjoint(p: &MultiPoly, t: &CommutingTuple, v: &[C64]) -> Result<Vec<C64>> {
    sparse_apply(p, t, v, true)
}
