//! Seeded random generators for matrices, contractions and polynomials.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lattice::MultiIndex;
use crate::linalg::DenseMatrix;
use crate::poly::{MatrixPoly, MultiPoly};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    DenseMatrix::from_row_major(rows, cols, data).expect("sized buffer")
}

/// Haar-like unitary from Gram–Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    let g = random_matrix(rng, n, n);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let proj: C64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            let (done, rest) = cols.split_at_mut(j);
            for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        let nrm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= nrm);
    }
    let mut u = DenseMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

/// Random matrix rescaled to operator norm `scale`.
pub fn scaled_to_norm(m: &DenseMatrix, scale: f64) -> DenseMatrix {
    let n = m.op_norm().expect("small matrix");
    if n == 0.0 {
        return m.clone();
    }
    m.scale(C64::new(scale / n, 0.0))
}

/// Random n×n contraction with norm drawn from [0.5, 1].
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    let m = random_matrix(rng, n, n);
    let s = rng.random_range(0.5..=1.0);
    scaled_to_norm(&m, s)
}

fn random_exponents<R: Rng + ?Sized>(rng: &mut R, d: usize, max_degree: usize) -> MultiIndex {
    let total = rng.random_range(0..=max_degree);
    let mut e = vec![0; d];
    for _ in 0..total {
        e[rng.random_range(0..d)] += 1;
    }
    MultiIndex::new(e)
}

/// Random polynomial of total degree ≤ `max_degree` with 1 to 8 terms and
/// complex Gaussian coefficients. Never the zero polynomial.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, d: usize, max_degree: usize) -> MultiPoly {
    loop {
        let count = rng.random_range(1..=8);
        let terms = (0..count).map(|_| (random_exponents(rng, d, max_degree), complex_gaussian(rng)));
        let p = MultiPoly::new(d, terms.collect::<Vec<_>>()).expect("consistent arity");
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn random_matrix_poly<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize, max_degree: usize) -> MatrixPoly {
    loop {
        let count = rng.random_range(1..=6);
        let terms: Vec<_> = (0..count)
            .map(|_| (random_exponents(rng, d, max_degree), random_matrix(rng, m, m)))
            .collect();
        let p = MatrixPoly::new(d, m, terms).expect("consistent shapes");
        if !p.terms().is_empty() {
            return p;
        }
    }
}

/// Commuting contractive pair (q₁(C), q₂(C)) for a random n×n matrix C and
/// random one-variable polynomials q₁, q₂, each rescaled to norm ≤ 1.
/// Commutativity is exact up to rounding because both are polynomials in C.
pub fn random_commuting_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (DenseMatrix, DenseMatrix) {
    let c = random_matrix(rng, n, n);
    let pick = |rng: &mut R| loop {
        let q = random_poly(rng, 1, 3);
        let mut acc = DenseMatrix::zeros(n, n);
        let mut power = DenseMatrix::identity(n);
        for k in 0..=q.degree() {
            if let Some((_, a)) = q.terms().iter().find(|(alpha, _)| alpha.degree() == k) {
                acc.add_scaled_assign(*a, &power).expect("square");
            }
            power = &power * &c;
        }
        if acc.max_abs() > 0.0 {
            let s = rng.random_range(0.5..=1.0);
            return scaled_to_norm(&acc, s);
        }
    };
    let a = pick(rng);
    let b = pick(rng);
    (a, b)
}
