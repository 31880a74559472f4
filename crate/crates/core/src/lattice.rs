//! Multi-indices over ℕ^d and origin-anchored truncation boxes.
//!
//! Fibers of a box are linearized lexicographically with axis 0 varying
//! fastest, so `rank(α) = α_0 + m_0·(α_1 + m_1·(α_2 + …))`. Every sparse
//! operator layout and every witness index in a report uses this ordering.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point α = (α_0, …, α_{d-1}) of ℕ^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

/// Direction of a unit step along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Up,
    Down,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        assert!(!entries.is_empty(), "multi-index arity must be at least 1");
        MultiIndex(entries)
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![0; d])
    }

    /// The unit multi-index ε_axis.
    pub fn unit(d: usize, axis: usize) -> Self {
        let mut e = vec![0; d];
        e[axis] = 1;
        Self::new(e)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// |α| = Σ α_j.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// α ± ε_axis, or `None` when stepping down from α_axis = 0 (the
    /// zero-operator convention for weights indexed below the lattice).
    pub fn shifted(&self, axis: usize, step: Step) -> Option<MultiIndex> {
        let mut e = self.0.clone();
        match step {
            Step::Up => e[axis] += 1,
            Step::Down => e[axis] = e[axis].checked_sub(1)?,
        }
        Some(MultiIndex(e))
    }

    /// First axis with a positive entry; the predecessor used when
    /// building values along the monomial DAG.
    pub fn first_nonzero_axis(&self) -> Option<usize> {
        self.0.iter().position(|&a| a > 0)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex::new(v)
    }
}

/// Outcome of [`shift_index`]: either the shifted index or the signal that
/// the step left ℕ^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shifted {
    Index(MultiIndex),
    OutOfLattice,
}

pub fn shift_index(alpha: &MultiIndex, axis: usize, step: Step) -> Shifted {
    match alpha.shifted(axis, step) {
        Some(a) => Shifted::Index(a),
        None => Shifted::OutOfLattice,
    }
}

/// Half-open rectangle {α : 0 ≤ α_j < m_j} anchored at the origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeBox {
    sides: Vec<usize>,
}

impl LatticeBox {
    pub fn new(sides: Vec<usize>) -> Result<Self> {
        if sides.is_empty() || sides.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "box sides must be positive and non-empty, got {sides:?}"
            )));
        }
        Ok(LatticeBox { sides })
    }

    /// The cube with side `m` in dimension `d`.
    pub fn cube(d: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; d])
    }

    pub fn arity(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn volume(&self) -> usize {
        self.sides.iter().product()
    }

    pub fn contains(&self, alpha: &MultiIndex) -> bool {
        alpha.arity() == self.arity()
            && alpha.entries().iter().zip(&self.sides).all(|(a, m)| a < m)
    }

    /// Every side increased by `by`.
    pub fn expanded(&self, by: usize) -> LatticeBox {
        LatticeBox {
            sides: self.sides.iter().map(|m| m + by).collect(),
        }
    }

    /// True when `self` is contained in `other` (same arity, sides no larger).
    pub fn is_subbox_of(&self, other: &LatticeBox) -> bool {
        self.arity() == other.arity() && self.sides.iter().zip(&other.sides).all(|(a, b)| a <= b)
    }

    pub fn rank(&self, alpha: &MultiIndex) -> Result<usize> {
        if !self.contains(alpha) {
            return Err(Error::IndexOutsideBox(format!(
                "{alpha:?} not in box {:?}",
                self.sides
            )));
        }
        Ok(self.rank_unchecked(alpha.entries()))
    }

    pub(crate) fn rank_unchecked(&self, alpha: &[usize]) -> usize {
        let mut k = 0;
        for (a, m) in alpha.iter().zip(&self.sides).rev() {
            k = k * m + a;
        }
        k
    }

    pub fn unrank(&self, k: usize) -> Result<MultiIndex> {
        if k >= self.volume() {
            return Err(Error::IndexOutsideBox(format!(
                "rank {k} out of range for box {:?} (volume {})",
                self.sides,
                self.volume()
            )));
        }
        let mut out = vec![0; self.arity()];
        self.unrank_into(k, &mut out);
        Ok(MultiIndex(out))
    }

    pub(crate) fn unrank_into(&self, mut k: usize, out: &mut [usize]) {
        for (o, m) in out.iter_mut().zip(&self.sides) {
            *o = k % m;
            k /= m;
        }
    }

    /// Rank of α + ε_axis, if it stays inside the box.
    pub(crate) fn rank_step_up(&self, alpha: &[usize], axis: usize) -> Option<usize> {
        if alpha[axis] + 1 >= self.sides[axis] {
            return None;
        }
        let stride: usize = self.sides[..axis].iter().product();
        Some(self.rank_unchecked(alpha) + stride)
    }

    /// Fibers in rank order.
    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.volume()).map(move |k| {
            let mut out = vec![0; self.arity()];
            self.unrank_into(k, &mut out);
            MultiIndex(out)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_index(&mi(&[2, 0, 1]), 0, Step::Up), Shifted::Index(mi(&[3, 0, 1])));
        assert_eq!(shift_index(&mi(&[2, 0, 1]), 1, Step::Down), Shifted::OutOfLattice);
        assert_eq!(shift_index(&mi(&[0, 0]), 1, Step::Up), Shifted::Index(mi(&[0, 1])));
    }

    #[test]
    fn rank_examples_match_enumeration() {
        let b = LatticeBox::cube(2, 3).unwrap();
        // k = α_0 + 3·α_1 enumerated by hand
        let mut expected = Vec::new();
        for a1 in 0..3 {
            for a0 in 0..3 {
                expected.push(mi(&[a0, a1]));
            }
        }
        let seen: Vec<_> = b.iter().collect();
        assert_eq!(seen, expected);
        assert_eq!(b.rank(&mi(&[0, 0])).unwrap(), 0);
        assert_eq!(b.rank(&mi(&[2, 1])).unwrap(), 5);
        assert_eq!(b.unrank(8).unwrap(), mi(&[2, 2]));
    }

    #[test]
    fn out_of_box_errors() {
        let b = LatticeBox::cube(2, 3).unwrap();
        assert!(matches!(b.rank(&mi(&[3, 0])), Err(Error::IndexOutsideBox(_))));
        assert!(matches!(b.unrank(9), Err(Error::IndexOutsideBox(_))));
        assert!(LatticeBox::new(vec![2, 0]).is_err());
    }

    #[test]
    fn step_up_rank_matches_rank_of_shift() {
        let b = LatticeBox::new(vec![3, 4, 2]).unwrap();
        for a in b.iter() {
            for j in 0..3 {
                let up = a.shifted(j, Step::Up).unwrap();
                let expect = b.rank(&up).ok();
                assert_eq!(b.rank_step_up(a.entries(), j), expect);
            }
        }
    }

    proptest! {
        #[test]
        fn rank_unrank_bijection(sides in prop::collection::vec(1usize..12, 1..4)) {
            let b = LatticeBox::new(sides).unwrap();
            prop_assume!(b.volume() <= 10_000);
            for k in 0..b.volume() {
                let a = b.unrank(k).unwrap();
                prop_assert_eq!(b.rank(&a).unwrap(), k);
                prop_assert_eq!(b.unrank(b.rank(&a).unwrap()).unwrap(), a);
            }
        }

        #[test]
        fn shift_up_then_down_is_identity(v in prop::collection::vec(0usize..20, 1..5), j in 0usize..5) {
            let j = j % v.len();
            let a = MultiIndex::new(v);
            let back = a.shifted(j, Step::Up).unwrap().shifted(j, Step::Down).unwrap();
            prop_assert_eq!(back, a.clone());
        }

        #[test]
        fn shifts_commute_across_axes(v in prop::collection::vec(0usize..20, 2..5), i in 0usize..5, j in 0usize..5) {
            let (i, j) = (i % v.len(), j % v.len());
            let a = MultiIndex::new(v);
            let ij = a.shifted(i, Step::Up).unwrap().shifted(j, Step::Up).unwrap();
            let ji = a.shifted(j, Step::Up).unwrap().shifted(i, Step::Up).unwrap();
            prop_assert_eq!(ij, ji);
        }
    }
}
