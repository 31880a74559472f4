use serde_json::json;

use vnlab_core::multishift::{
    build_truncated_multishift, certificate_polynomials, decompose_diagonal, unitary_intertwiner, validate_weights,
};
use vnlab_core::poly::{AnyPoly, MultiPoly};
use vnlab_core::vncheck::{
    check_matrix_vn, check_vn, linspace, reproduce_example, sweep_c, varopoulos_tuple, VaropoulosConfig, Verdict,
};
use vnlab_core::Error;

use crate::input::{self, emit, emit_value, CliResult};
use crate::{CheckArgs, Command};

pub fn run(command: Command, seed: u64) -> CliResult<u8> {
    match command {
        Command::Validate { weights, sides, output } => {
            let w = input::weights(&weights)?;
            let b = input::lattice_box(&sides, w.arity())?;
            let report = validate_weights(&w, &b)?;
            emit(&report, output.as_deref())?;
            Ok(if report.accepted { 0 } else { 2 })
        }
        Command::Check(args) => check(args, seed),
        Command::Sweep { c_from, c_to, steps, poly, precision, output } => {
            let p = match poly {
                None => MultiPoly::varopoulos_kaijser(),
                Some(path) => match input::polynomial(&path)? {
                    AnyPoly::Scalar(p) => p,
                    AnyPoly::Matrix(_) => {
                        return Err(Error::InvalidInput("sweep takes a scalar polynomial".into()).into());
                    }
                },
            };
            if p.arity() != 3 {
                return Err(Error::ArityMismatch { expected: 3, got: p.arity() }.into());
            }
            let table = sweep_c(&linspace(c_from, c_to, steps), &p, &precision.vn_config(seed))?;
            emit(&table, output.as_deref())?;
            let fmt = |b: Option<f64>| b.map_or_else(|| "none".to_string(), |b| format!("{b:.6}"));
            eprintln!(
                "sup in [{:.6}, {:.6}]; 6(1-c)^2 exceeds the upper bound for c below {}; violated verdicts for c below {}; 1/(6+sqrt 30) = {:.6}",
                table.sup.lower,
                table.sup.upper,
                fmt(table.certified_boundary),
                fmt(table.violated_boundary),
                table.threshold,
            );
            Ok(0)
        }
        Command::Intertwine { weights_a, weights_b, sides, output } => {
            let a = input::weights(&weights_a)?;
            let b = input::weights(&weights_b)?;
            let lbox = input::lattice_box(&sides, a.arity())?;
            let it = unitary_intertwiner(&a, &b, &lbox)?;
            emit(it.report(), output.as_deref())?;
            Ok(if it.report().within_tolerance { 0 } else { 2 })
        }
        Command::Decompose { weights, sides, polys, precision, output } => {
            let w = input::weights(&weights)?;
            let b = input::lattice_box(&sides, w.arity())?;
            let dec = decompose_diagonal(&w, &b)?;
            let cfg = precision.vn_config(seed);
            let cert = dec.certify(&certificate_polynomials(w.arity(), polys, seed), &cfg.power)?;
            let passed = cert.passed;
            emit_value(
                json!({
                    "kind": w.kind(),
                    "box": b.sides(),
                    "components": dec.components().iter().map(|c| c.to_json()).collect::<Vec<_>>(),
                    "certificate": cert,
                }),
                output.as_deref(),
            )?;
            Ok(if passed { 0 } else { 2 })
        }
        Command::ReproduceExample { c, precision, output } => {
            let r = reproduce_example(c, &precision.vn_config(seed))?;
            emit(&r, output.as_deref())?;
            eprintln!(
                "c = {c}: lhs {:.6} (6(1-c)^2 = {:.6}), sup in [{:.6}, {:.6}], verdict {}, margin {:.6}, oracle gap {:.2e}",
                r.report.lhs.value,
                r.guaranteed_lhs,
                r.report.sup.lower,
                r.report.sup.upper,
                r.report.verdict,
                r.report.margin,
                r.oracle_gap,
            );
            Ok(if r.reproduced { 0 } else { 5 })
        }
    }
}

fn check(args: CheckArgs, seed: u64) -> CliResult<u8> {
    let t = if let Some(path) = &args.weights {
        let w = input::weights(path)?;
        let b = input::lattice_box(args.sides.as_deref().unwrap_or_default(), w.arity())?;
        build_truncated_multishift(&w, &b)?
    } else if let Some(path) = &args.tuple {
        input::dense_tuple(path)?
    } else if let Some(c) = args.varopoulos {
        varopoulos_tuple(&VaropoulosConfig::new(c)?)?
    } else {
        return Err(Error::InvalidInput("one of --weights, --tuple or --varopoulos is required".into()).into());
    };
    let p = match (&args.poly, args.pv) {
        (Some(path), _) => input::polynomial(path)?,
        (None, true) => AnyPoly::Scalar(MultiPoly::varopoulos_kaijser()),
        (None, false) => return Err(Error::InvalidInput("one of --poly or --pv is required".into()).into()),
    };
    let cfg = args.precision.vn_config(seed);
    let report = match &p {
        AnyPoly::Scalar(p) => check_vn(&t, p, &cfg)?,
        AnyPoly::Matrix(p) => check_matrix_vn(&t, p, &cfg)?,
    };
    emit(&report, args.output.as_deref())?;
    Ok(match report.verdict {
        Verdict::Holds => 0,
        Verdict::Violated => 3,
        Verdict::Inconclusive => 4,
    })
}
