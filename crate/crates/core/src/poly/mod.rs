//! Multivariate polynomials with scalar or square-matrix coefficients.

mod sup;

use std::cmp::Ordering;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{self, MatrixJson};
use crate::lattice::MultiIndex;
use crate::linalg::DenseMatrix;

pub use sup::{polydisc_sup, Phases, SupBracket, SupConfig, ToTorus, TorusFunction};

/// Canonical term order: rank order in any box containing both indices
/// (axis 0 fastest), i.e. compare the last axis first.
pub(crate) fn rank_order(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.entries().iter().rev().cmp(b.entries().iter().rev())
}

/// Per-axis power tables z_j^k for k ≤ max exponent along axis j.
pub(crate) fn power_tables(z: &[C64], max_exp: &[usize]) -> Vec<Vec<C64>> {
    z.iter()
        .zip(max_exp)
        .map(|(&zj, &k)| {
            let mut t = Vec::with_capacity(k + 1);
            let mut acc = C64::new(1.0, 0.0);
            t.push(acc);
            for _ in 0..k {
                acc *= zj;
                t.push(acc);
            }
            t
        })
        .collect()
}

pub(crate) fn monomial_from_tables(tables: &[Vec<C64>], alpha: &MultiIndex) -> C64 {
    alpha
        .entries()
        .iter()
        .zip(tables)
        .fold(C64::new(1.0, 0.0), |acc, (&a, t)| acc * t[a])
}

/// p(z) = Σ a_α z^α with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    d: usize,
    terms: Vec<(MultiIndex, C64)>,
}

impl MultiPoly {
    /// Builds a polynomial, summing repeated multi-indices and dropping
    /// zero coefficients.
    pub fn new(d: usize, terms: impl IntoIterator<Item = (MultiIndex, C64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("polynomial arity must be at least 1".into()));
        }
        let mut v: Vec<(MultiIndex, C64)> = Vec::new();
        for (alpha, a) in terms {
            if alpha.arity() != d {
                return Err(Error::ArityMismatch { expected: d, got: alpha.arity() });
            }
            v.push((alpha, a));
        }
        v.sort_by(|x, y| rank_order(&x.0, &y.0));
        let mut merged: Vec<(MultiIndex, C64)> = Vec::with_capacity(v.len());
        for (alpha, a) in v {
            match merged.last_mut() {
                Some((last, acc)) if *last == alpha => *acc += a,
                _ => merged.push((alpha, a)),
            }
        }
        merged.retain(|(_, a)| *a != C64::new(0.0, 0.0));
        Ok(MultiPoly { d, terms: merged })
    }

    pub fn zero(d: usize) -> Self {
        MultiPoly { d, terms: Vec::new() }
    }

    pub fn constant(d: usize, c: C64) -> Self {
        Self::new(d, [(MultiIndex::zero(d), c)]).expect("valid arity")
    }

    pub fn monomial(alpha: MultiIndex, coeff: C64) -> Self {
        Self::new(alpha.arity(), [(alpha, coeff)]).expect("valid arity")
    }

    /// The coordinate function z_axis.
    pub fn coordinate(d: usize, axis: usize) -> Self {
        Self::monomial(MultiIndex::unit(d, axis), C64::new(1.0, 0.0))
    }

    /// z₁² + z₂² + z₃² − 2z₁z₂ − 2z₂z₃ − 2z₃z₁, whose sup over the closed
    /// tridisc is 5.
    pub fn varopoulos_kaijser() -> Self {
        let t = |a: [usize; 3], c: f64| (MultiIndex::new(a.to_vec()), C64::new(c, 0.0));
        Self::new(
            3,
            [
                t([2, 0, 0], 1.0),
                t([0, 2, 0], 1.0),
                t([0, 0, 2], 1.0),
                t([1, 1, 0], -2.0),
                t([0, 1, 1], -2.0),
                t([1, 0, 1], -2.0),
            ],
        )
        .expect("fixed arity")
    }

    pub fn arity(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(MultiIndex, C64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree k = max |α| (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(a, _)| a.degree()).max().unwrap_or(0)
    }

    pub(crate) fn max_exponents(&self) -> Vec<usize> {
        let mut m = vec![0; self.d];
        for (a, _) in &self.terms {
            for (mj, &aj) in m.iter_mut().zip(a.entries()) {
                *mj = (*mj).max(aj);
            }
        }
        m
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.d {
            return Err(Error::ArityMismatch { expected: self.d, got: z.len() });
        }
        let tables = power_tables(z, &self.max_exponents());
        Ok(self
            .terms
            .iter()
            .map(|(alpha, a)| a * monomial_from_tables(&tables, alpha))
            .sum())
    }

    /// Σ |a_α|, a ceiling for the polydisc sup-norm.
    pub fn coeff_upper_bound(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm()).sum()
    }

    /// Polynomial with conjugated coefficients.
    pub fn conj(&self) -> MultiPoly {
        MultiPoly {
            d: self.d,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> MultiPoly {
        MultiPoly::new(self.d, self.terms.iter().map(|(a, c)| (a.clone(), c * s))).expect("same arity")
    }

    /// Stable textual identity for reports.
    pub fn describe(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(alpha, a)| format!("({:+}{:+}i){:?}", a.re, a.im, alpha))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(alpha, a)| TermJson {
                    alpha: alpha.entries().to_vec(),
                    re: Some(a.re),
                    im: Some(a.im),
                    block: None,
                })
                .collect(),
        }
    }
}

/// P(z) = Σ A_α z^α with m×m coefficient blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPoly {
    d: usize,
    m: usize,
    terms: Vec<(MultiIndex, DenseMatrix)>,
}

impl MatrixPoly {
    pub fn new(d: usize, m: usize, terms: impl IntoIterator<Item = (MultiIndex, DenseMatrix)>) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidInput("matrix polynomial needs d ≥ 1 and m ≥ 1".into()));
        }
        let mut v: Vec<(MultiIndex, DenseMatrix)> = Vec::new();
        for (alpha, a) in terms {
            if alpha.arity() != d {
                return Err(Error::ArityMismatch { expected: d, got: alpha.arity() });
            }
            if a.rows() != m || a.cols() != m {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient block is {}x{}, expected {m}x{m}",
                    a.rows(),
                    a.cols()
                )));
            }
            v.push((alpha, a));
        }
        v.sort_by(|x, y| rank_order(&x.0, &y.0));
        let mut merged: Vec<(MultiIndex, DenseMatrix)> = Vec::with_capacity(v.len());
        for (alpha, a) in v {
            match merged.last_mut() {
                Some((last, acc)) if *last == alpha => *acc = acc.add(&a)?,
                _ => merged.push((alpha, a)),
            }
        }
        merged.retain(|(_, a)| a.max_abs() != 0.0);
        Ok(MatrixPoly { d, m, terms: merged })
    }

    /// The m = 1 embedding of a scalar polynomial.
    pub fn from_scalar(p: &MultiPoly) -> Self {
        MatrixPoly {
            d: p.d,
            m: 1,
            terms: p
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), DenseMatrix::diagonal(&[*c])))
                .collect(),
        }
    }

    /// I_m ⊗ p: p repeated down the block diagonal.
    pub fn identity_times(p: &MultiPoly, m: usize) -> Self {
        Self::new(
            p.d,
            m,
            p.terms
                .iter()
                .map(|(a, c)| (a.clone(), DenseMatrix::identity(m).scale(*c))),
        )
        .expect("consistent shapes")
    }

    /// diag(p_0, …, p_{m-1}).
    pub fn block_diagonal(polys: &[MultiPoly]) -> Result<Self> {
        let m = polys.len();
        let d = polys.first().map(|p| p.d).ok_or_else(|| Error::InvalidInput("no polynomials".into()))?;
        let mut terms = Vec::new();
        for (i, p) in polys.iter().enumerate() {
            if p.d != d {
                return Err(Error::ArityMismatch { expected: d, got: p.d });
            }
            for (a, c) in &p.terms {
                let mut block = DenseMatrix::zeros(m, m);
                block[(i, i)] = *c;
                terms.push((a.clone(), block));
            }
        }
        Self::new(d, m, terms)
    }

    pub fn arity(&self) -> usize {
        self.d
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[(MultiIndex, DenseMatrix)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(a, _)| a.degree()).max().unwrap_or(0)
    }

    /// The scalar polynomial when m = 1.
    pub fn as_scalar(&self) -> Option<MultiPoly> {
        (self.m == 1).then(|| MultiPoly {
            d: self.d,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c[(0, 0)])).collect(),
        })
    }

    /// Entry (i, j) as a scalar polynomial.
    pub fn entry(&self, i: usize, j: usize) -> MultiPoly {
        MultiPoly::new(self.d, self.terms.iter().map(|(a, c)| (a.clone(), c[(i, j)]))).expect("same arity")
    }

    pub fn eval(&self, z: &[C64]) -> Result<DenseMatrix> {
        if z.len() != self.d {
            return Err(Error::ArityMismatch { expected: self.d, got: z.len() });
        }
        let mut max_exp = vec![0; self.d];
        for (a, _) in &self.terms {
            for (mj, &aj) in max_exp.iter_mut().zip(a.entries()) {
                *mj = (*mj).max(aj);
            }
        }
        let tables = power_tables(z, &max_exp);
        let mut out = DenseMatrix::zeros(self.m, self.m);
        for (alpha, a) in &self.terms {
            out.add_scaled_assign(monomial_from_tables(&tables, alpha), a)?;
        }
        Ok(out)
    }

    /// Σ ‖A_α‖.
    pub fn coeff_upper_bound(&self) -> Result<f64> {
        self.terms.iter().map(|(_, a)| a.op_norm()).sum()
    }

    pub fn describe(&self) -> String {
        format!("matrix polynomial d={} m={} terms={}", self.d, self.m, self.terms.len())
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(alpha, a)| TermJson {
                    alpha: alpha.entries().to_vec(),
                    re: None,
                    im: None,
                    block: Some(json::matrix_to_json(a)),
                })
                .collect(),
        }
    }
}

/// `{"d": int, "terms": [{"alpha": [...], "re": f, "im": f}]}`; matrix
/// coefficients use `"block"` instead of `re`/`im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub d: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub alpha: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub block: Option<MatrixJson>,
}

/// A parsed polynomial document.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPoly {
    Scalar(MultiPoly),
    Matrix(MatrixPoly),
}

impl PolyJson {
    pub fn parse(text: &str) -> Result<AnyPoly> {
        json::from_str::<PolyJson>(text)?.into_poly()
    }

    pub fn into_poly(self) -> Result<AnyPoly> {
        let has_block = self.terms.iter().any(|t| t.block.is_some());
        for (i, t) in self.terms.iter().enumerate() {
            if t.alpha.len() != self.d {
                return Err(Error::malformed(
                    format!("terms[{i}].alpha"),
                    format!("expected {} exponents, got {}", self.d, t.alpha.len()),
                ));
            }
            if has_block && t.block.is_none() {
                return Err(Error::malformed(format!("terms[{i}].block"), "missing in a matrix polynomial"));
            }
            if has_block && (t.re.is_some() || t.im.is_some()) {
                return Err(Error::malformed(format!("terms[{i}]"), "block terms take no re/im"));
            }
        }
        if self.d == 0 {
            return Err(Error::malformed("d", "arity must be at least 1"));
        }
        if !has_block {
            let terms = self
                .terms
                .into_iter()
                .map(|t| (MultiIndex::new(t.alpha), C64::new(t.re.unwrap_or(0.0), t.im.unwrap_or(0.0))));
            return Ok(AnyPoly::Scalar(MultiPoly::new(self.d, terms)?));
        }
        let mut terms = Vec::new();
        let mut m = None;
        for (i, t) in self.terms.into_iter().enumerate() {
            let path = format!("terms[{i}].block");
            let block = json::matrix_from_json(t.block.as_ref().expect("checked above"), &path)?;
            if !block.is_square() || m.is_some_and(|m| m != block.rows()) {
                return Err(Error::malformed(path, "blocks must be square and of equal size"));
            }
            m = Some(block.rows());
            terms.push((MultiIndex::new(t.alpha), block));
        }
        Ok(AnyPoly::Matrix(MatrixPoly::new(self.d, m.unwrap_or(1), terms)?))
    }
}
