use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calculus::{eval_matrix_poly_on_tuple, eval_poly_on_tuple};
use crate::error::Result;
use crate::linalg::{NormEstimate, NormMethod, NormRegistry, PowerIterationConfig};
use crate::multishift::CommutingTuple;
use crate::poly::{polydisc_sup, MatrixPoly, MultiPoly, PolyJson, SupBracket, SupConfig};

/// Slack allowed above 1 when checking that the tuple is contractive.
pub const CONTRACTIVE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnConfig {
    pub sup: SupConfig,
    /// Name in the norm-estimator registry.
    pub norm_method: String,
    pub power: PowerIterationConfig,
    /// Slack on both sides of the sup bracket before a verdict is taken.
    pub tolerance: f64,
}

impl Default for VnConfig {
    fn default() -> Self {
        VnConfig {
            sup: SupConfig::default(),
            norm_method: "auto".into(),
            power: PowerIterationConfig::default(),
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhsNorm {
    pub value: f64,
    pub method: NormMethod,
    pub converged: bool,
}

impl From<NormEstimate> for LhsNorm {
    fn from(e: NormEstimate) -> Self {
        LhsNorm { value: e.value, method: e.method, converged: e.converged }
    }
}

/// One adjudication of ‖p(T)‖ ≤ sup_{𝔻^d} ‖p‖.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnReport {
    pub polynomial: PolyJson,
    pub tuple: String,
    pub lhs: LhsNorm,
    pub sup: SupBracket,
    pub verdict: Verdict,
    /// lhs − upper when violated, lower − lhs otherwise.
    pub margin: f64,
    /// False when some ‖T_j‖ exceeds 1; the verdict is then inconclusive.
    pub contractive: bool,
    pub tolerance: f64,
}

/// Three-valued comparison of an operator norm against a sup bracket.
/// A non-converged power-iteration value can still certify a violation,
/// since it is a lower bound, but never a pass.
pub fn classify(lhs: &NormEstimate, sup: &SupBracket, tolerance: f64) -> (Verdict, f64) {
    if lhs.value > sup.upper + tolerance {
        return (Verdict::Violated, lhs.value - sup.upper);
    }
    let margin = sup.lower - lhs.value;
    if lhs.value <= sup.lower + tolerance && (lhs.is_exact() || lhs.converged) {
        (Verdict::Holds, margin)
    } else {
        (Verdict::Inconclusive, margin)
    }
}

fn contractive(t: &CommutingTuple) -> Result<bool> {
    Ok(t.norms()?.iter().all(|&n| n <= 1.0 + CONTRACTIVE_TOL))
}

fn assemble(
    polynomial: PolyJson,
    t: &CommutingTuple,
    lhs: NormEstimate,
    sup: &SupBracket,
    cfg: &VnConfig,
) -> Result<VnReport> {
    let is_contractive = contractive(t)?;
    let (mut verdict, margin) = classify(&lhs, sup, cfg.tolerance);
    if !is_contractive {
        verdict = Verdict::Inconclusive;
    }
    Ok(VnReport {
        polynomial,
        tuple: t.label().to_string(),
        lhs: lhs.into(),
        sup: sup.clone(),
        verdict,
        margin,
        contractive: is_contractive,
        tolerance: cfg.tolerance,
    })
}

/// Checks the scalar inequality for `p` on `t`.
pub fn check_vn(t: &CommutingTuple, p: &MultiPoly, cfg: &VnConfig) -> Result<VnReport> {
    let sup = polydisc_sup(p, &cfg.sup)?;
    check_vn_with_sup(t, p, &sup, cfg)
}

/// As [`check_vn`] with a precomputed sup bracket for `p`.
pub fn check_vn_with_sup(t: &CommutingTuple, p: &MultiPoly, sup: &SupBracket, cfg: &VnConfig) -> Result<VnReport> {
    let value = eval_poly_on_tuple(p, t)?;
    let estimator = NormRegistry::with_builtins().create(&cfg.norm_method, &cfg.power)?;
    let lhs = estimator.estimate(&value)?;
    assemble(p.to_json(), t, lhs, sup, cfg)
}

/// Checks the matrix-valued inequality ‖(p_ij(T))‖ ≤ sup ‖(p_ij(z))‖.
pub fn check_matrix_vn(t: &CommutingTuple, p: &MatrixPoly, cfg: &VnConfig) -> Result<VnReport> {
    let sup = polydisc_sup(p, &cfg.sup)?;
    check_matrix_vn_with_sup(t, p, &sup, cfg)
}

pub fn check_matrix_vn_with_sup(t: &CommutingTuple, p: &MatrixPoly, sup: &SupBracket, cfg: &VnConfig) -> Result<VnReport> {
    if let Some(scalar) = p.as_scalar() {
        return check_vn_with_sup(t, &scalar, sup, cfg);
    }
    let value = eval_matrix_poly_on_tuple(p, t)?;
    let estimator = NormRegistry::with_builtins().create(&cfg.norm_method, &cfg.power)?;
    let lhs = estimator.estimate(&value)?;
    assemble(p.to_json(), t, lhs, sup, cfg)
}
