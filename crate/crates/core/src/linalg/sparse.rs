use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::dense::DenseMatrix;
use super::operator::LinearOperator;
use super::DENSE_DIM_LIMIT;
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;

/// Fiber count above which matvecs fan out over the rayon pool.
const PARALLEL_FIBERS: usize = 4096;

/// One n×n block mapping fiber `source` to fiber `target`.
#[derive(Clone, Debug)]
pub struct Block {
    pub source: usize,
    pub target: usize,
    pub matrix: DenseMatrix,
}

/// Block operator on ℓ²_{ℂⁿ}(box): the vector index of component `i` of
/// fiber `α` is `rank(α)·n + i`.
#[derive(Clone, Debug)]
pub struct SparseBlockOperator {
    lbox: LatticeBox,
    fiber_dim: usize,
    sources: Vec<usize>,
    targets: Vec<usize>,
    /// Block k occupies `data[k·n²..(k+1)·n²]`, row-major.
    data: Vec<C64>,
    by_target: Csr,
    by_source: Csr,
}

#[derive(Clone, Debug)]
struct Csr {
    ptr: Vec<usize>,
    idx: Vec<usize>,
}

impl Csr {
    fn build(keys: &[usize], len: usize) -> Csr {
        let mut ptr = vec![0; len + 1];
        for &k in keys {
            ptr[k + 1] += 1;
        }
        for i in 0..len {
            ptr[i + 1] += ptr[i];
        }
        let mut fill = ptr.clone();
        let mut idx = vec![0; keys.len()];
        for (b, &k) in keys.iter().enumerate() {
            idx[fill[k]] = b;
            fill[k] += 1;
        }
        Csr { ptr, idx }
    }

    fn row(&self, i: usize) -> &[usize] {
        &self.idx[self.ptr[i]..self.ptr[i + 1]]
    }
}

impl SparseBlockOperator {
    pub fn new(lbox: LatticeBox, fiber_dim: usize, blocks: Vec<Block>) -> Result<Self> {
        let vol = lbox.volume();
        let nn = fiber_dim * fiber_dim;
        let mut sources = Vec::with_capacity(blocks.len());
        let mut targets = Vec::with_capacity(blocks.len());
        let mut data = Vec::with_capacity(blocks.len() * nn);
        for b in &blocks {
            if b.source >= vol || b.target >= vol {
                return Err(Error::IndexOutsideBox(format!(
                    "block ({}, {}) outside volume {vol}",
                    b.source, b.target
                )));
            }
            if b.matrix.rows() != fiber_dim || b.matrix.cols() != fiber_dim {
                return Err(Error::ShapeMismatch(format!(
                    "block is {}x{}, fiber dimension is {fiber_dim}",
                    b.matrix.rows(),
                    b.matrix.cols()
                )));
            }
            sources.push(b.source);
            targets.push(b.target);
            data.extend_from_slice(b.matrix.as_slice());
        }
        let mut pairs: Vec<(usize, usize)> = sources.iter().copied().zip(targets.iter().copied()).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate (source, target) block".into()));
        }
        let by_target = Csr::build(&targets, vol);
        let by_source = Csr::build(&sources, vol);
        Ok(SparseBlockOperator {
            lbox,
            fiber_dim,
            sources,
            targets,
            data,
            by_target,
            by_source,
        })
    }

    pub fn identity(lbox: LatticeBox, fiber_dim: usize) -> Self {
        let blocks = (0..lbox.volume())
            .map(|k| Block {
                source: k,
                target: k,
                matrix: DenseMatrix::identity(fiber_dim),
            })
            .collect();
        Self::new(lbox, fiber_dim, blocks).expect("identity blocks are well formed")
    }

    pub fn zero(lbox: LatticeBox, fiber_dim: usize) -> Self {
        Self::new(lbox, fiber_dim, Vec::new()).expect("empty block list is well formed")
    }

    pub fn lattice_box(&self) -> &LatticeBox {
        &self.lbox
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn dim(&self) -> usize {
        self.fiber_dim * self.lbox.volume()
    }

    pub fn block_count(&self) -> usize {
        self.sources.len()
    }

    fn block_slice(&self, k: usize) -> &[C64] {
        let nn = self.fiber_dim * self.fiber_dim;
        &self.data[k * nn..(k + 1) * nn]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, &[C64])> + '_ {
        (0..self.sources.len()).map(move |k| (self.sources[k], self.targets[k], self.block_slice(k)))
    }

    /// (target, block) pairs leaving fiber `source`.
    pub fn blocks_from(&self, source: usize) -> impl Iterator<Item = (usize, &[C64])> + '_ {
        self.by_source.row(source).iter().map(move |&k| (self.targets[k], self.block_slice(k)))
    }

    /// Block mapping `source` into `target`, if present.
    pub fn block(&self, source: usize, target: usize) -> Option<DenseMatrix> {
        self.by_source
            .row(source)
            .iter()
            .find(|&&k| self.targets[k] == target)
            .map(|&k| {
                DenseMatrix::from_row_major(self.fiber_dim, self.fiber_dim, self.block_slice(k).to_vec())
                    .expect("stored block has fiber shape")
            })
    }

    /// Largest block operator norm.
    pub fn max_block_norm(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for k in 0..self.sources.len() {
            let m = DenseMatrix::from_row_major(self.fiber_dim, self.fiber_dim, self.block_slice(k).to_vec())?;
            best = best.max(m.op_norm()?);
        }
        Ok(best)
    }

    fn fiber_apply(&self, fiber: usize, x: &[C64], out: &mut [C64]) {
        let n = self.fiber_dim;
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for &k in self.by_target.row(fiber) {
            let b = self.block_slice(k);
            let src = &x[self.sources[k] * n..(self.sources[k] + 1) * n];
            for (i, o) in out.iter_mut().enumerate() {
                let row = &b[i * n..(i + 1) * n];
                *o += row.iter().zip(src).map(|(a, s)| a * s).sum::<C64>();
            }
        }
    }

    fn fiber_apply_adjoint(&self, fiber: usize, x: &[C64], out: &mut [C64]) {
        let n = self.fiber_dim;
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for &k in self.by_source.row(fiber) {
            let b = self.block_slice(k);
            let src = &x[self.targets[k] * n..(self.targets[k] + 1) * n];
            for (i, s) in src.iter().enumerate() {
                let row = &b[i * n..(i + 1) * n];
                for (o, a) in out.iter_mut().zip(row) {
                    *o += a.conj() * s;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let dim = self.dim();
        if dim > DENSE_DIM_LIMIT {
            return Err(Error::DimensionTooLarge(dim));
        }
        let n = self.fiber_dim;
        let mut m = DenseMatrix::zeros(dim, dim);
        for (s, t, b) in self.blocks() {
            for i in 0..n {
                for j in 0..n {
                    m[(t * n + i, s * n + j)] += b[i * n + j];
                }
            }
        }
        Ok(m)
    }
}

impl LinearOperator for SparseBlockOperator {
    fn dim(&self) -> usize {
        SparseBlockOperator::dim(self)
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.fiber_dim;
        if self.lbox.volume() >= PARALLEL_FIBERS {
            y.par_chunks_mut(n)
                .enumerate()
                .for_each(|(f, out)| self.fiber_apply(f, x, out));
        } else {
            y.chunks_mut(n)
                .enumerate()
                .for_each(|(f, out)| self.fiber_apply(f, x, out));
        }
    }

    fn apply_adjoint(&self, x: &[C64], y: &mut [C64]) {
        let n = self.fiber_dim;
        if self.lbox.volume() >= PARALLEL_FIBERS {
            y.par_chunks_mut(n)
                .enumerate()
                .for_each(|(f, out)| self.fiber_apply_adjoint(f, x, out));
        } else {
            y.chunks_mut(n)
                .enumerate()
                .for_each(|(f, out)| self.fiber_apply_adjoint(f, x, out));
        }
    }

    fn densify(&self) -> Option<DenseMatrix> {
        self.to_dense().ok()
    }
}
