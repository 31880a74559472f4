//! Certified sup-norm brackets over the closed polydisc.
//!
//! By the maximum modulus principle the sup is attained on the torus
//! {|z_j| = 1}, so everything here works with angles θ ∈ [0, 2π)^d and
//! f(θ) = Σ A_α e^{i α·θ}.
//!
//! The lower end is the best value seen (grid points, coordinate-ascent
//! refinement, cell centers). The upper end is a maximum of per-cell
//! bounds over a cover of the torus. For a cell with center c and half
//! widths h, writing F = f(c) and G_j = ∂_j f(c),
//!
//!   ‖f(c+t)‖ ≤ sqrt(‖F‖² + Σ_j h_j ‖F*G_j + G_j*F‖ + (Σ_j ‖G_j‖ h_j)²) + ½ Σ_jk M_jk h_j h_k
//!
//! with M_jk = Σ ‖A_α‖ α_j α_k bounding every second derivative, and the
//! first-order bound ‖F‖ + Σ_j L_j h_j with L_j = Σ ‖A_α‖ α_j. Cells whose
//! bound exceeds the running lower end by more than `cert_tol` are bisected
//! along every axis.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MatrixPoly, MultiPoly};
use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::linalg::{op_norm_dense, DenseMatrix};

/// Largest arity the torus search supports.
pub const MAX_ARITY: usize = 8;
const TOP_K: usize = 8;

type Angles = [f64; MAX_ARITY];

/// Maps a multi-index α to the monomial phase e^{iα·θ} at some point θ.
pub type Phases<'a> = dyn Fn(&[usize]) -> C64 + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupConfig {
    /// Grid points per axis; cells of side 2π/grid_n form the initial cover.
    pub grid_n: usize,
    /// Coordinate-ascent sweeps from each of the best grid points.
    pub refine_steps: usize,
    /// Target bracket width for adaptive subdivision; 0 disables it.
    pub cert_tol: f64,
    /// Bisection depth limit per initial cell.
    pub max_depth: usize,
}

impl Default for SupConfig {
    fn default() -> Self {
        SupConfig {
            grid_n: 200,
            refine_steps: 20,
            cert_tol: 1e-4,
            max_depth: 24,
        }
    }
}

impl SupConfig {
    /// Uniform-grid bracket only, without adaptive subdivision.
    pub fn grid_only(grid_n: usize) -> Self {
        SupConfig {
            grid_n,
            cert_tol: 0.0,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBracket {
    pub lower: f64,
    pub upper: f64,
    /// Torus angles where `lower` was attained.
    pub witness: Vec<f64>,
}

impl SupBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// A polynomial restricted to the torus, with the derivative data the
/// cell bounds need.
pub trait TorusFunction: Sync {
    fn arity(&self) -> usize;

    /// Largest total degree among the terms.
    fn degree(&self) -> usize;

    /// ‖f‖ at the point whose monomial phases are `phase(α)`.
    fn norm_with(&self, phase: &Phases<'_>) -> f64;

    /// (‖f(center)‖, upper bound of ‖f‖ over the cell `center ± half`), with
    /// the center's monomial phases given by `phase`.
    fn cell_bound_with(&self, phase: &Phases<'_>, half: &[f64]) -> (f64, f64);

    /// Σ ‖A_α‖·|α|, a Lipschitz constant for θ ↦ ‖f‖ in the ℓ² metric.
    fn lipschitz(&self) -> f64;

    /// Bound on the floating-point error of a single `norm_at`.
    fn rounding_slack(&self) -> f64;

    /// Σ ‖A_α‖, which bounds ‖f‖ everywhere and is exact for a monomial.
    fn coefficient_bound(&self) -> f64;

    /// Whether some term involves θ_j.
    fn depends_on(&self, axis: usize) -> bool;

    /// ‖f(e^{iθ})‖
    fn norm_at(&self, theta: &[f64]) -> f64 {
        self.norm_with(&|a| phase(a, theta))
    }

    /// (‖f(center)‖, upper bound of ‖f‖ over the cell `center ± half`).
    fn cell_bound(&self, center: &[f64], half: &[f64]) -> (f64, f64) {
        self.cell_bound_with(&|a| phase(a, center), half)
    }
}

/// Polynomials that can be searched on the torus.
pub trait ToTorus {
    fn torus_function(&self) -> Result<Box<dyn TorusFunction>>;
}

struct Derivatives {
    axis: Vec<f64>,
    hessian: Vec<f64>,
    lipschitz: f64,
    total: f64,
    slack: f64,
}

impl Derivatives {
    fn new<'a>(d: usize, terms: impl Iterator<Item = (&'a [usize], f64)>) -> Self {
        let mut axis = vec![0.0; d];
        let mut hessian = vec![0.0; d * d];
        let mut lipschitz = 0.0;
        let mut total = 0.0;
        for (alpha, norm) in terms {
            total += norm;
            lipschitz += norm * alpha.iter().sum::<usize>() as f64;
            for j in 0..d {
                axis[j] += norm * alpha[j] as f64;
                for k in 0..d {
                    hessian[j * d + k] += norm * (alpha[j] * alpha[k]) as f64;
                }
            }
        }
        Derivatives {
            axis,
            hessian,
            lipschitz,
            total,
            slack: 1e-13 * (1.0 + total),
        }
    }

    fn first_order(&self, half: &[f64]) -> f64 {
        self.axis.iter().zip(half).map(|(l, h)| l * h).sum()
    }

    fn second_order(&self, half: &[f64]) -> f64 {
        let d = self.axis.len();
        let mut s = 0.0;
        for j in 0..d {
            for k in 0..d {
                s += self.hessian[j * d + k] * half[j] * half[k];
            }
        }
        0.5 * s
    }
}

fn phase(alpha: &[usize], theta: &[f64]) -> C64 {
    let t: f64 = alpha.iter().zip(theta).map(|(&a, &t)| a as f64 * t).sum();
    C64::from_polar(1.0, t)
}

struct ScalarTorus {
    d: usize,
    terms: Vec<(Vec<usize>, C64)>,
    deriv: Derivatives,
}

impl ScalarTorus {
    fn new(p: &MultiPoly) -> Self {
        let terms: Vec<(Vec<usize>, C64)> = p.terms().iter().map(|(a, c)| (a.entries().to_vec(), *c)).collect();
        let deriv = Derivatives::new(p.arity(), terms.iter().map(|(a, c)| (a.as_slice(), c.norm())));
        ScalarTorus { d: p.arity(), terms, deriv }
    }
}

impl TorusFunction for ScalarTorus {
    fn arity(&self) -> usize {
        self.d
    }

    fn degree(&self) -> usize {
        self.terms.iter().map(|(a, _)| a.iter().sum::<usize>()).max().unwrap_or(0)
    }

    fn norm_with(&self, phase: &Phases<'_>) -> f64 {
        self.terms.iter().map(|(a, c)| c * phase(a)).sum::<C64>().norm()
    }

    fn cell_bound_with(&self, phase: &Phases<'_>, half: &[f64]) -> (f64, f64) {
        let mut f = C64::new(0.0, 0.0);
        let mut g = [C64::new(0.0, 0.0); MAX_ARITY];
        for (a, c) in &self.terms {
            let v = c * phase(a);
            f += v;
            let iv = C64::new(-v.im, v.re);
            for j in 0..self.d {
                if a[j] != 0 {
                    g[j] += iv * a[j] as f64;
                }
            }
        }
        let fa = f.norm();
        let mut cross = 0.0;
        let mut grad = 0.0;
        for j in 0..self.d {
            cross += half[j] * 2.0 * (f.conj() * g[j]).re.abs();
            grad += half[j] * g[j].norm();
        }
        let second = (fa * fa + cross + grad * grad).sqrt() + self.deriv.second_order(half);
        let first = fa + self.deriv.first_order(half);
        (fa, first.min(second) + self.deriv.slack)
    }

    fn lipschitz(&self) -> f64 {
        self.deriv.lipschitz
    }

    fn rounding_slack(&self) -> f64 {
        self.deriv.slack
    }

    fn coefficient_bound(&self) -> f64 {
        self.deriv.total
    }

    fn depends_on(&self, axis: usize) -> bool {
        self.deriv.axis[axis] > 0.0
    }
}

struct MatrixTorus {
    d: usize,
    m: usize,
    terms: Vec<(Vec<usize>, DenseMatrix)>,
    deriv: Derivatives,
}

impl MatrixTorus {
    fn new(p: &MatrixPoly) -> Result<Self> {
        let terms: Vec<(Vec<usize>, DenseMatrix)> =
            p.terms().iter().map(|(a, c)| (a.entries().to_vec(), c.clone())).collect();
        if p.block_size() > crate::linalg::DENSE_DIM_LIMIT {
            return Err(Error::DimensionTooLarge(p.block_size()));
        }
        let norms = terms.iter().map(|(_, c)| c.op_norm()).collect::<Result<Vec<f64>>>()?;
        let deriv = Derivatives::new(p.arity(), terms.iter().zip(&norms).map(|((a, _), &n)| (a.as_slice(), n)));
        Ok(MatrixTorus {
            d: p.arity(),
            m: p.block_size(),
            terms,
            deriv,
        })
    }

    fn value(&self, phase: &Phases<'_>) -> DenseMatrix {
        let mut f = DenseMatrix::zeros(self.m, self.m);
        for (a, c) in &self.terms {
            f.add_scaled_assign(phase(a), c).expect("uniform block size");
        }
        f
    }
}

fn block_norm(m: &DenseMatrix) -> f64 {
    op_norm_dense(m).expect("block size checked at construction")
}

impl TorusFunction for MatrixTorus {
    fn arity(&self) -> usize {
        self.d
    }

    fn degree(&self) -> usize {
        self.terms.iter().map(|(a, _)| a.iter().sum::<usize>()).max().unwrap_or(0)
    }

    fn norm_with(&self, phase: &Phases<'_>) -> f64 {
        block_norm(&self.value(phase))
    }

    fn cell_bound_with(&self, phase: &Phases<'_>, half: &[f64]) -> (f64, f64) {
        let mut f = DenseMatrix::zeros(self.m, self.m);
        let mut g: Vec<DenseMatrix> = vec![DenseMatrix::zeros(self.m, self.m); self.d];
        for (a, c) in &self.terms {
            let v = phase(a);
            f.add_scaled_assign(v, c).expect("uniform block size");
            let iv = C64::new(-v.im, v.re);
            for j in 0..self.d {
                if a[j] != 0 {
                    g[j].add_scaled_assign(iv * a[j] as f64, c).expect("uniform block size");
                }
            }
        }
        let fa = block_norm(&f);
        let fstar = f.adjoint();
        let mut active = Vec::new();
        let mut shift = 0.0;
        let mut grad = 0.0;
        for j in 0..self.d {
            if half[j] == 0.0 {
                continue;
            }
            let fg = &fstar * &g[j];
            let herm = fg.add(&fg.adjoint()).expect("square");
            shift += half[j] * block_norm(&herm);
            grad += half[j] * block_norm(&g[j]);
            active.push((half[j], herm));
        }
        // λ_max(F*F + Σ δ_j H_j) is convex in δ, so over the cell it peaks at a
        // corner; the shift keeps each corner matrix positive so its norm is λ_max
        let mut base = &fstar * &f;
        base.add_scaled_assign(C64::new(shift, 0.0), &DenseMatrix::identity(self.m)).expect("square");
        let top = (0..1usize << active.len())
            .map(|corner| {
                let mut x = base.clone();
                for (k, (h, herm)) in active.iter().enumerate() {
                    let sign = if corner >> k & 1 == 1 { 1.0 } else { -1.0 };
                    x.add_scaled_assign(C64::new(sign * h, 0.0), herm).expect("square");
                }
                block_norm(&x) - shift
            })
            .fold(0.0, f64::max);
        let second = (top + grad * grad).sqrt() + self.deriv.second_order(half);
        let first = fa + self.deriv.first_order(half);
        (fa, first.min(second) + self.rounding_slack())
    }

    fn lipschitz(&self) -> f64 {
        self.deriv.lipschitz
    }

    fn rounding_slack(&self) -> f64 {
        self.deriv.slack * (1.0 + 1e-3 * self.m as f64)
    }

    fn coefficient_bound(&self) -> f64 {
        self.deriv.total
    }

    fn depends_on(&self, axis: usize) -> bool {
        self.deriv.axis[axis] > 0.0
    }
}

impl ToTorus for MultiPoly {
    fn torus_function(&self) -> Result<Box<dyn TorusFunction>> {
        check_arity(self.arity())?;
        Ok(Box::new(ScalarTorus::new(self)))
    }
}

impl ToTorus for MatrixPoly {
    fn torus_function(&self) -> Result<Box<dyn TorusFunction>> {
        check_arity(self.arity())?;
        // m = 1 goes through the scalar path so both give identical brackets
        if let Some(p) = self.as_scalar() {
            return Ok(Box::new(ScalarTorus::new(&p)));
        }
        Ok(Box::new(MatrixTorus::new(self)?))
    }
}

fn check_arity(d: usize) -> Result<()> {
    if d > MAX_ARITY {
        return Err(Error::InvalidConfig(format!("torus search supports arity ≤ {MAX_ARITY}, got {d}")));
    }
    Ok(())
}

/// Bracket [lower, upper] around sup over the closed polydisc of ‖p‖.
pub fn polydisc_sup(p: &impl ToTorus, cfg: &SupConfig) -> Result<SupBracket> {
    let f = p.torus_function()?;
    sup_of(f.as_ref(), cfg)
}

/// (value, rank) ordered by value descending, then rank ascending.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    value: f64,
    rank: usize,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.value > b.value || (a.value == b.value && a.rank < b.rank)
}

fn merge_top(mut a: Vec<Candidate>, b: Vec<Candidate>) -> Vec<Candidate> {
    a.extend(b);
    a.sort_by(|x, y| y.value.total_cmp(&x.value).then(x.rank.cmp(&y.rank)));
    a.truncate(TOP_K);
    a
}

/// e^{2πik/n} for k < n·(degree + 1): on the grid every monomial phase is
/// one of these, indexed by Σ α_j k_j.
fn roots_of_unity(n: usize, degree: usize) -> Vec<C64> {
    let base: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
    base.iter().copied().cycle().take(n * (degree + 1)).collect()
}

fn grid_phase<'a>(roots: &'a [C64], idx: &'a [usize]) -> impl Fn(&[usize]) -> C64 + 'a {
    move |alpha| roots[alpha.iter().zip(idx).map(|(&a, &i)| a * i).sum::<usize>()]
}

fn grid_indices(grid: &LatticeBox, rank: usize) -> [usize; MAX_ARITY] {
    let mut idx = [0usize; MAX_ARITY];
    grid.unrank_into(rank, &mut idx[..grid.arity()]);
    idx
}

fn grid_angles(grid: &LatticeBox, rank: usize, step: f64) -> Angles {
    let mut idx = [0usize; MAX_ARITY];
    let d = grid.arity();
    grid.unrank_into(rank, &mut idx[..d]);
    let mut theta = [0.0; MAX_ARITY];
    for j in 0..d {
        theta[j] = idx[j] as f64 * step;
    }
    theta
}

fn refine(f: &dyn TorusFunction, start: Angles, start_value: f64, grid_n: usize, sweeps: usize) -> (f64, Angles) {
    let d = f.arity();
    let (mut best, mut theta) = (start_value, start);
    let mut step = PI / grid_n as f64;
    for _ in 0..sweeps {
        for j in (0..d).filter(|&j| f.depends_on(j)) {
            for sign in [1.0, -1.0] {
                let mut trial = theta;
                trial[j] = (trial[j] + sign * step).rem_euclid(2.0 * PI);
                let v = f.norm_at(&trial[..d]);
                if v > best {
                    best = v;
                    theta = trial;
                }
            }
        }
        step *= 0.5;
    }
    (best, theta)
}

struct Scan {
    top: Vec<Candidate>,
    /// Largest bound among cells settled during the scan.
    upper: f64,
    /// (rank, first-level bound) of the remaining cells.
    open: Vec<(usize, f64)>,
}

impl Scan {
    fn empty() -> Self {
        Scan { top: Vec::new(), upper: 0.0, open: Vec::new() }
    }

    fn merge(mut self, other: Scan) -> Scan {
        self.top = merge_top(self.top, other.top);
        self.upper = self.upper.max(other.upper);
        self.open.extend(other.open);
        self
    }
}

#[derive(Clone, Copy)]
struct CellAcc {
    upper: f64,
    best: f64,
    best_rank: usize,
    best_theta: Angles,
}

impl CellAcc {
    fn empty() -> Self {
        CellAcc {
            upper: 0.0,
            best: f64::NEG_INFINITY,
            best_rank: usize::MAX,
            best_theta: [0.0; MAX_ARITY],
        }
    }

    fn merge(self, other: CellAcc) -> CellAcc {
        let take_other = other.best > self.best || (other.best == self.best && other.best_rank < self.best_rank);
        let (best, best_rank, best_theta) = if take_other {
            (other.best, other.best_rank, other.best_theta)
        } else {
            (self.best, self.best_rank, self.best_theta)
        };
        CellAcc {
            upper: self.upper.max(other.upper),
            best,
            best_rank,
            best_theta,
        }
    }
}

/// Fixed data for the branch-and-bound over cells.
struct Search<'a> {
    f: &'a dyn TorusFunction,
    /// Axes the function depends on; cells are only bisected along these.
    active: &'a [usize],
    /// Global bound every cell bound is clipped to.
    cap: f64,
    threshold: f64,
    cfg: &'a SupConfig,
}

impl Search<'_> {
    fn halves(&self, half: f64) -> Angles {
        let mut h = [0.0; MAX_ARITY];
        for &j in self.active {
            h[j] = half;
        }
        h
    }

    fn bound(&self, phase: &Phases<'_>, half: f64) -> (f64, f64) {
        let (value, bound) = self.f.cell_bound_with(phase, &self.halves(half)[..self.f.arity()]);
        (value, bound.min(self.cap))
    }

    fn explore(&self, center: Angles, center_phase: Option<&Phases<'_>>, half: f64, depth: usize, rank: usize, acc: &mut CellAcc) {
        let d = self.f.arity();
        let (value, bound) = match center_phase {
            Some(ph) => self.bound(ph, half),
            None => self.bound(&|a| phase(a, &center[..d]), half),
        };
        if value > acc.best {
            acc.best = value;
            acc.best_rank = rank;
            acc.best_theta = center;
        }
        let cfg = self.cfg;
        let settled = bound <= self.threshold || bound - value <= 0.5 * cfg.cert_tol;
        if cfg.cert_tol <= 0.0 || settled || depth >= cfg.max_depth {
            acc.upper = acc.upper.max(bound);
            return;
        }
        let child_half = 0.5 * half;
        for corner in 0..(1usize << self.active.len()) {
            let mut c = center;
            for (k, &j) in self.active.iter().enumerate() {
                c[j] += if corner >> k & 1 == 1 { child_half } else { -child_half };
            }
            self.explore(c, None, child_half, depth + 1, rank, acc);
        }
    }
}

pub(crate) fn sup_of(f: &dyn TorusFunction, cfg: &SupConfig) -> Result<SupBracket> {
    if cfg.grid_n < 8 {
        return Err(Error::InvalidConfig(format!("grid_n must be at least 8, got {}", cfg.grid_n)));
    }
    let d = f.arity();
    check_arity(d)?;
    let active: Vec<usize> = (0..d).filter(|&j| f.depends_on(j)).collect();
    // axes the function ignores get a single grid point at angle 0
    let grid = LatticeBox::new((0..d).map(|j| if f.depends_on(j) { cfg.grid_n } else { 1 }).collect())?;
    let step = 2.0 * PI / cfg.grid_n as f64;
    let total = grid.volume();
    let roots = roots_of_unity(cfg.grid_n, f.degree());

    // one pass over the grid: center values and first-level cell bounds;
    // cells whose bound beats the running maximum stay open
    let settled_at = |value: f64, bound: f64| cfg.cert_tol <= 0.0 || cfg.max_depth == 0 || bound - value <= 0.5 * cfg.cert_tol;
    let half = PI / cfg.grid_n as f64;
    let mut search = Search {
        f,
        active: &active,
        cap: f.coefficient_bound() + f.rounding_slack(),
        threshold: f64::INFINITY,
        cfg,
    };
    let scan = (0..total)
        .into_par_iter()
        .fold(Scan::empty, |mut acc, rank| {
            let idx = grid_indices(&grid, rank);
            let (value, bound) = search.bound(&grid_phase(&roots, &idx[..d]), half);
            let c = Candidate { value, rank };
            if acc.top.len() < TOP_K || better(&c, acc.top.last().expect("non-empty")) {
                acc.top = merge_top(std::mem::take(&mut acc.top), vec![c]);
            }
            if settled_at(value, bound) || bound <= acc.top[0].value {
                acc.upper = acc.upper.max(bound);
            } else {
                acc.open.push((rank, bound));
            }
            acc
        })
        .reduce(Scan::empty, Scan::merge);
    let top = scan.top;
    let grid_max = top.first().map_or(0.0, |c| c.value);

    // coordinate ascent from the best grid points
    let mut lower = grid_max;
    let mut witness = top.first().map_or([0.0; MAX_ARITY], |c| grid_angles(&grid, c.rank, step));
    for c in &top {
        let (v, theta) = refine(f, grid_angles(&grid, c.rank, step), c.value, cfg.grid_n, cfg.refine_steps);
        if v > lower {
            lower = v;
            witness = theta;
        }
    }

    let spread = f.lipschitz() * PI * (active.len() as f64).sqrt() / cfg.grid_n as f64;
    let crude_upper = search.cap.min(grid_max + f.rounding_slack() + spread);

    // subdivide the open cells that the refined lower bound does not settle
    search.threshold = lower + cfg.cert_tol.max(0.0);
    let search = search;
    let mut open = scan.open;
    open.sort_unstable_by_key(|&(rank, _)| rank);
    let init = CellAcc { upper: scan.upper, ..CellAcc::empty() };
    let cells = open
        .par_iter()
        .fold(CellAcc::empty, |mut acc, &(rank, bound)| {
            if bound <= search.threshold {
                acc.upper = acc.upper.max(bound);
            } else {
                let idx = grid_indices(&grid, rank);
                let ph = grid_phase(&roots, &idx[..d]);
                search.explore(grid_angles(&grid, rank, step), Some(&ph), half, 0, rank, &mut acc);
            }
            acc
        })
        .reduce(CellAcc::empty, CellAcc::merge)
        .merge(init);

    if cells.best > lower {
        lower = cells.best;
        witness = cells.best_theta;
    }
    // computed norms may overshoot the true value by rounding
    lower = (lower - f.rounding_slack()).max(0.0);
    let upper = crude_upper.min(cells.upper).max(lower);
    let witness = witness[..d].iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    Ok(SupBracket { lower, upper, witness })
}
