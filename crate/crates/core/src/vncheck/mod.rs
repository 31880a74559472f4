//! Verdicts on von Neumann's inequality, the Varopoulos–Kaijser
//! counterexample and witness bounds for tensor tuples.

mod report;
mod varopoulos;
mod witness;

pub use report::{
    check_matrix_vn, check_matrix_vn_with_sup, check_vn, check_vn_with_sup, classify, LhsNorm, Verdict, VnConfig, VnReport,
    CONTRACTIVE_TOL,
};
pub use varopoulos::{
    guaranteed_lhs, linspace, pv_closed_form, reproduce_example, sweep_c, threshold, varopoulos_tuple, ExampleReport,
    SweepRow, SweepTable, VaropoulosConfig, MAX_SUP_WIDTH, ORACLE_TOL, PV_SUP, SIGN_MATRIX,
};
pub use witness::{varopoulos_witness_sweep, witness_lower_bound, WitnessRow};
