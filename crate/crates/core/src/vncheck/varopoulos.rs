//! The Varopoulos–Kaijser counterexample: three commuting 4×4 contractions
//! A_j = cI + V_j on which p_V exceeds its polydisc sup-norm 5.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::report::{check_vn_with_sup, VnConfig, VnReport, Verdict};
use crate::calculus::eval_poly_on_tuple;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::multishift::CommutingTuple;
use crate::poly::{polydisc_sup, MultiPoly, SupBracket};

/// Coefficients a_jk of p_V = Σ_jk a_jk z_j z_k.
pub const SIGN_MATRIX: [[f64; 3]; 3] = [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];

/// sup over the closed polydisc of |p_V|.
pub const PV_SUP: f64 = 5.0;

/// Largest c for which 6(1−c)² > 5, namely 1/(6+√30).
pub fn threshold() -> f64 {
    1.0 / (6.0 + 30f64.sqrt())
}

/// 6(1−c)², the guaranteed lower bound on ‖p_V(A)‖ at the default vectors.
pub fn guaranteed_lhs(c: f64) -> f64 {
    6.0 * (1.0 - c) * (1.0 - c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaropoulosConfig {
    pub c: f64,
    /// X_j = (x_j, y_j), each of length 1 − c.
    pub xs: [[f64; 2]; 3],
}

impl VaropoulosConfig {
    /// X_1 = (1−c)(1, 0), X_2 = (1−c)(−1/2, √3/2), X_3 = (1−c)(−1/2, −√3/2).
    pub fn new(c: f64) -> Result<Self> {
        let h = 3f64.sqrt() / 2.0;
        let r = 1.0 - c;
        let cfg = VaropoulosConfig { c, xs: [[r, 0.0], [-0.5 * r, h * r], [-0.5 * r, -h * r]] };
        cfg.validate()?;
        Ok(cfg)
    }

    /// X_j = (1−c)(cos θ_j, sin θ_j).
    pub fn with_angles(c: f64, angles: [f64; 3]) -> Result<Self> {
        let r = 1.0 - c;
        let cfg = VaropoulosConfig { c, xs: angles.map(|t| [r * t.cos(), r * t.sin()]) };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidConfig(format!("c must lie in (0, 1), got {}", self.c)));
        }
        let r2 = (1.0 - self.c) * (1.0 - self.c);
        for (j, x) in self.xs.iter().enumerate() {
            let len2 = x[0] * x[0] + x[1] * x[1];
            if (len2 - r2).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "|X_{}|² = {len2} but (1−c)² = {r2}",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// The nilpotent V_j with x_j at (0,1), (1,3) and y_j at (0,2), (2,3).
    pub fn nilpotents(&self) -> Vec<DenseMatrix> {
        self.xs
            .iter()
            .map(|&[x, y]| {
                DenseMatrix::from_real_rows(&[&[0.0, x, y, 0.0], &[0.0, 0.0, 0.0, x], &[0.0, 0.0, 0.0, y], &[0.0, 0.0, 0.0, 0.0]])
            })
            .collect()
    }
}

/// (cI + V_1, cI + V_2, cI + V_3).
pub fn varopoulos_tuple(cfg: &VaropoulosConfig) -> Result<CommutingTuple> {
    cfg.validate()?;
    let ci = DenseMatrix::identity(4).scale(C64::new(cfg.c, 0.0));
    let mats = cfg.nilpotents().iter().map(|v| ci.add(v)).collect::<Result<Vec<_>>>()?;
    Ok(CommutingTuple::dense(mats)?.with_label(format!("varopoulos(c = {})", cfg.c)))
}

/// p_V(A) assembled entry by entry from c, the X_j and the sign matrix.
pub fn pv_closed_form(cfg: &VaropoulosConfig) -> DenseMatrix {
    let (mut diag, mut sx, mut sy, mut corner) = (0.0, 0.0, 0.0, 0.0);
    for (j, row) in SIGN_MATRIX.iter().enumerate() {
        for (k, &a) in row.iter().enumerate() {
            let (xj, xk) = (cfg.xs[j], cfg.xs[k]);
            diag += cfg.c * cfg.c * a;
            sx += cfg.c * a * (xj[0] + xk[0]);
            sy += cfg.c * a * (xj[1] + xk[1]);
            corner += a * (xj[0] * xk[0] + xj[1] * xk[1]);
        }
    }
    DenseMatrix::from_real_rows(&[
        &[diag, sx, sy, corner],
        &[0.0, diag, 0.0, sx],
        &[0.0, 0.0, diag, sy],
        &[0.0, 0.0, 0.0, diag],
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub lhs: f64,
    pub guaranteed_lhs: f64,
    /// 6(1−c)² exceeds the certified sup upper bound.
    pub certified: bool,
    pub verdict: Verdict,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub polynomial: String,
    pub sup: SupBracket,
    pub rows: Vec<SweepRow>,
    /// Midpoint between the last certified c and the first uncertified c
    /// of the leading certified run.
    pub certified_boundary: Option<f64>,
    /// Same for verdict = violated.
    pub violated_boundary: Option<f64>,
    pub threshold: f64,
}

fn leading_run_boundary(rows: &[SweepRow], hit: impl Fn(&SweepRow) -> bool) -> Option<f64> {
    let first_miss = rows.iter().position(|r| !hit(r))?;
    if first_miss == 0 {
        return None;
    }
    Some(0.5 * (rows[first_miss - 1].c + rows[first_miss].c))
}

/// Checks `p` on the Varopoulos tuple at each c (default vectors), with one
/// shared sup bracket.
pub fn sweep_c(c_values: &[f64], p: &MultiPoly, cfg: &VnConfig) -> Result<SweepTable> {
    let sup = polydisc_sup(p, &cfg.sup)?;
    let mut rows = Vec::with_capacity(c_values.len());
    for &c in c_values {
        let t = varopoulos_tuple(&VaropoulosConfig::new(c)?)?;
        let r = check_vn_with_sup(&t, p, &sup, cfg)?;
        rows.push(SweepRow {
            c,
            lhs: r.lhs.value,
            guaranteed_lhs: guaranteed_lhs(c),
            certified: guaranteed_lhs(c) > sup.upper,
            verdict: r.verdict,
            margin: r.margin,
        });
    }
    Ok(SweepTable {
        polynomial: p.describe(),
        certified_boundary: leading_run_boundary(&rows, |r| r.certified),
        violated_boundary: leading_run_boundary(&rows, |r| r.verdict == Verdict::Violated),
        sup,
        rows,
        threshold: threshold(),
    })
}

/// `steps + 1` evenly spaced values from `from` to `to`.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![from];
    }
    (0..=steps).map(|k| from + (to - from) * k as f64 / steps as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub c: f64,
    pub guaranteed_lhs: f64,
    /// ‖generic calculus − closed form‖.
    pub oracle_gap: f64,
    pub report: VnReport,
    pub sup_contains_five: bool,
    pub sup_width: f64,
    pub reproduced: bool,
}

/// Largest accepted oracle gap.
pub const ORACLE_TOL: f64 = 1e-10;

/// Widest sup bracket accepted as pinning the sup at 5.
pub const MAX_SUP_WIDTH: f64 = 1e-2;

/// End-to-end Varopoulos–Kaijser check at `c`.
pub fn reproduce_example(c: f64, cfg: &VnConfig) -> Result<ExampleReport> {
    let vcfg = VaropoulosConfig::new(c)?;
    let t = varopoulos_tuple(&vcfg)?;
    let p = MultiPoly::varopoulos_kaijser();
    let generic = eval_poly_on_tuple(&p, &t)?;
    let closed = pv_closed_form(&vcfg);
    let oracle_gap = generic
        .as_dense()
        .expect("dense tuple")
        .sub(&closed)?
        .op_norm()?;
    let sup = polydisc_sup(&p, &cfg.sup)?;
    let report = check_vn_with_sup(&t, &p, &sup, cfg)?;
    let sup_contains_five = sup.contains(PV_SUP);
    let reproduced = oracle_gap <= ORACLE_TOL
        && report.lhs.value >= guaranteed_lhs(c) - 1e-12
        && sup_contains_five
        && sup.width() <= MAX_SUP_WIDTH
        && report.verdict == Verdict::Violated;
    Ok(ExampleReport {
        c,
        guaranteed_lhs: guaranteed_lhs(c),
        oracle_gap,
        sup_width: sup.width(),
        report,
        sup_contains_five,
        reproduced,
    })
}
