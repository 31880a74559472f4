//! Operator-norm estimators, registered by name.
//!
//! `dense-svd` materializes the operator and takes its largest singular
//! value. `power-iteration` runs matrix-free power iteration on M*M and
//! only ever reports a lower bound. `auto` picks between the two by size.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dense::op_norm_dense;
use super::operator::{norm2, LinearOperator};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerIterationConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        PowerIterationConfig {
            tol: 1e-10,
            max_iter: 5000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerIterationResult {
    /// Best Rayleigh-quotient estimate; never exceeds the true norm
    /// beyond rounding.
    pub lower: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Seeded start vector: all-ones plus a small seeded complex perturbation.
pub fn start_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| {
            let re: f64 = rng.random_range(-0.25..0.25);
            let im: f64 = rng.random_range(-0.25..0.25);
            C64::new(1.0 + re, im)
        })
        .collect()
}

/// Power iteration on M*M. Each sweep is one `apply` and one
/// `apply_adjoint`; convergence requires three consecutive sweeps whose
/// estimates differ by less than `tol·estimate`.
pub fn op_norm_sparse(op: &dyn LinearOperator, cfg: &PowerIterationConfig) -> Result<PowerIterationResult> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("power-iteration tol must be positive, got {}", cfg.tol)));
    }
    let dim = op.dim();
    if dim == 0 {
        return Ok(PowerIterationResult { lower: 0.0, converged: true, iterations: 0 });
    }
    let mut x = start_vector(dim, cfg.seed);
    let nx = norm2(&x);
    x.iter_mut().for_each(|z| *z /= nx);
    let mut y = vec![C64::new(0.0, 0.0); dim];

    let mut lower: f64 = 0.0;
    let mut prev = f64::NAN;
    let mut streak = 0;
    for it in 1..=cfg.max_iter {
        op.apply(&x, &mut y);
        let est = norm2(&y);
        lower = lower.max(est);
        if est == 0.0 {
            return Ok(PowerIterationResult { lower, converged: true, iterations: it });
        }
        if (est - prev).abs() < cfg.tol * est {
            streak += 1;
            if streak >= 3 {
                return Ok(PowerIterationResult { lower, converged: true, iterations: it });
            }
        } else {
            streak = 0;
        }
        prev = est;
        op.apply_adjoint(&y, &mut x);
        let nz = norm2(&x);
        if nz == 0.0 {
            return Ok(PowerIterationResult { lower, converged: true, iterations: it });
        }
        x.iter_mut().for_each(|z| *z /= nz);
    }
    Ok(PowerIterationResult { lower, converged: false, iterations: cfg.max_iter })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    DenseSvd,
    PowerIteration,
}

impl fmt::Display for NormMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMethod::DenseSvd => "dense-svd",
            NormMethod::PowerIteration => "power-iteration",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    /// Always true for dense SVD.
    pub converged: bool,
}

impl NormEstimate {
    /// True when `value` is the norm itself rather than only a lower bound.
    pub fn is_exact(&self) -> bool {
        self.method == NormMethod::DenseSvd
    }
}

pub trait NormEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, op: &dyn LinearOperator) -> Result<NormEstimate>;
}

pub struct DenseSvdEstimator;

impl NormEstimator for DenseSvdEstimator {
    fn name(&self) -> &'static str {
        "dense-svd"
    }

    fn estimate(&self, op: &dyn LinearOperator) -> Result<NormEstimate> {
        let m = op.densify().ok_or(Error::DimensionTooLarge(op.dim()))?;
        Ok(NormEstimate {
            value: op_norm_dense(&m)?,
            method: NormMethod::DenseSvd,
            converged: true,
        })
    }
}

pub struct PowerIterationEstimator {
    pub config: PowerIterationConfig,
}

impl NormEstimator for PowerIterationEstimator {
    fn name(&self) -> &'static str {
        "power-iteration"
    }

    fn estimate(&self, op: &dyn LinearOperator) -> Result<NormEstimate> {
        let r = op_norm_sparse(op, &self.config)?;
        Ok(NormEstimate {
            value: r.lower,
            method: NormMethod::PowerIteration,
            converged: r.converged,
        })
    }
}

/// Dense SVD up to `dense_limit`, power iteration beyond.
pub struct AutoEstimator {
    pub dense_limit: usize,
    pub power: PowerIterationEstimator,
}

impl NormEstimator for AutoEstimator {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn estimate(&self, op: &dyn LinearOperator) -> Result<NormEstimate> {
        if op.dim() <= self.dense_limit {
            if let Some(m) = op.densify() {
                return Ok(NormEstimate {
                    value: op_norm_dense(&m)?,
                    method: NormMethod::DenseSvd,
                    converged: true,
                });
            }
        }
        self.power.estimate(op)
    }
}

pub const DEFAULT_AUTO_DENSE_LIMIT: usize = 512;

type Factory = fn(&PowerIterationConfig) -> Box<dyn NormEstimator>;

/// Name → constructor table for norm estimators.
pub struct NormRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

impl NormRegistry {
    pub fn empty() -> Self {
        NormRegistry { factories: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("dense-svd", |_| Box::new(DenseSvdEstimator));
        r.register("power-iteration", |cfg| {
            Box::new(PowerIterationEstimator { config: cfg.clone() })
        });
        r.register("auto", |cfg| {
            Box::new(AutoEstimator {
                dense_limit: DEFAULT_AUTO_DENSE_LIMIT,
                power: PowerIterationEstimator { config: cfg.clone() },
            })
        });
        r
    }

    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn create(&self, name: &str, cfg: &PowerIterationConfig) -> Result<Box<dyn NormEstimator>> {
        let f = self.factories.get(name).ok_or_else(|| Error::UnknownStrategy {
            what: "norm estimator",
            name: name.to_string(),
        })?;
        Ok(f(cfg))
    }
}
