//! Acceptance criteria, one PASS/FAIL line each. Runs as a single test so
//! the timed criteria do not share the machine with each other.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vnlab_core::calculus::eval_poly_on_tuple;
use vnlab_core::lattice::LatticeBox;
use vnlab_core::linalg::LinearOperator;
use vnlab_core::multishift::{
    build_truncated_multishift, certificate_polynomials, decompose_diagonal, truncated_unweighted_shift,
    unitary_intertwiner, validate_weights, CommutingTuple, ScalarWeights, WeightFamily,
};
use vnlab_core::poly::{polydisc_sup, MultiPoly, SupConfig};
use vnlab_core::sampling::{random_commuting_pair, random_contraction, random_matrix, random_matrix_poly, random_poly};
use vnlab_core::vncheck::{
    check_matrix_vn_with_sup, check_vn_with_sup, guaranteed_lhs, linspace, pv_closed_form, sweep_c, threshold,
    varopoulos_tuple, varopoulos_witness_sweep, VaropoulosConfig, Verdict, VnConfig,
};
use vnlab_core::C64;

const EXAMPLE_C: f64 = 0.05;
const EXAMPLE_MIN_LHS: f64 = 5.415;
const EXAMPLE_MAX_WIDTH: f64 = 1e-2;
const EXAMPLE_MIN_MARGIN: f64 = 0.40;
const EXAMPLE_BUDGET: Duration = Duration::from_secs(5);

const SWEEP_FROM: f64 = 0.05;
const SWEEP_TO: f64 = 0.12;
const SWEEP_STEPS: usize = 200;
const THRESHOLD_DECIMAL: f64 = 0.087129;
const BOUNDARY_TOL: f64 = 0.001;
const SWEEP_BUDGET: Duration = Duration::from_secs(60);

const ORACLE_CONFIGS: usize = 100;
const ORACLE_TOL: f64 = 1e-10;

const SUITE_TUPLES: usize = 500;
const SUITE_POLYS: usize = 50;
const SUITE_DIM: usize = 4;
const SUITE_DEGREE: usize = 4;

const COMMUTING_REL_TOL: f64 = 1e-12;
const MONOTONE_TOL: f64 = 1e-10;
const KRON_TOL: f64 = 1e-8;
const INTERTWINER_TOL: f64 = 1e-9;
const DECOMPOSITION_TOL: f64 = 1e-8;

const WITNESS_C: f64 = 0.02;
const WITNESS_SIDES: [usize; 5] = [8, 16, 24, 32, 40];
const WITNESS_TARGET: f64 = 5.0;
const WITNESS_BUDGET: Duration = Duration::from_secs(600);

const MATRIX_POLYS: usize = 20;

const SUP_POLYS: usize = 50;
const BRUTE_FACTOR: usize = 4;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(id: usize, name: &str, o: &Outcome, took: Duration) {
    let mut err = std::io::stderr().lock();
    let tag = if o.passed { "PASS" } else { "FAIL" };
    writeln!(err, "{tag} criterion {id} {name}: {} [{:.1}s]", o.detail, took.as_secs_f64()).unwrap();
}

fn counterexample_reproduction() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_vnlab"))
        .args(["reproduce-example", "--c", &EXAMPLE_C.to_string()])
        .env_remove("VNLAB_SEED")
        .env_remove("VNLAB_THREADS")
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &v["report"];
    let lhs = r["lhs"]["value"].as_f64().unwrap();
    let (lower, upper) = (r["sup"]["lower"].as_f64().unwrap(), r["sup"]["upper"].as_f64().unwrap());
    let margin = r["margin"].as_f64().unwrap();
    let passed = out.status.code() == Some(0)
        && lhs >= EXAMPLE_MIN_LHS
        && lower <= 5.0
        && upper >= 5.0
        && upper - lower <= EXAMPLE_MAX_WIDTH
        && r["verdict"] == "violated"
        && margin >= EXAMPLE_MIN_MARGIN
        && elapsed < EXAMPLE_BUDGET;
    Outcome {
        passed,
        detail: format!(
            "lhs {lhs:.6}, sup [{lower:.6}, {upper:.6}] width {:.1e}, verdict {}, margin {margin:.4}, {:.2}s",
            upper - lower,
            r["verdict"],
            elapsed.as_secs_f64()
        ),
    }
}

fn threshold_fidelity() -> Outcome {
    let start = Instant::now();
    let table = sweep_c(&linspace(SWEEP_FROM, SWEEP_TO, SWEEP_STEPS), &MultiPoly::varopoulos_kaijser(), &VnConfig::default())
        .unwrap();
    let elapsed = start.elapsed();
    let closed = 1.0 / (6.0 + 30f64.sqrt());
    let Some(b) = table.certified_boundary else {
        return Outcome { passed: false, detail: "no certified region found".into() };
    };
    let passed = (b - THRESHOLD_DECIMAL).abs() <= BOUNDARY_TOL
        && (closed - THRESHOLD_DECIMAL).abs() < 1e-6
        && (threshold() - closed).abs() < 1e-15
        && elapsed < SWEEP_BUDGET;
    Outcome {
        passed,
        detail: format!(
            "boundary {b:.6} vs {closed:.6} (|diff| {:.1e}), violated verdicts up to {:?}, {:.2}s",
            (b - closed).abs(),
            table.violated_boundary,
            elapsed.as_secs_f64()
        ),
    }
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = MultiPoly::varopoulos_kaijser();
    let mut worst: f64 = 0.0;
    for _ in 0..ORACLE_CONFIGS {
        let c = rng.random_range(0.01..0.99);
        let angles = [0, 1, 2].map(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let cfg = VaropoulosConfig::with_angles(c, angles).unwrap();
        let t = varopoulos_tuple(&cfg).unwrap();
        let generic = eval_poly_on_tuple(&p, &t).unwrap();
        let gap = generic.as_dense().unwrap().sub(&pv_closed_form(&cfg)).unwrap().op_norm().unwrap();
        worst = worst.max(gap);
    }
    Outcome { passed: worst <= ORACLE_TOL, detail: format!("worst gap {worst:.2e} over {ORACLE_CONFIGS} configs") }
}

fn classical_suites() -> Outcome {
    let cfg = VnConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut details = Vec::new();
    let mut passed = true;
    for d in [1usize, 2] {
        let polys: Vec<MultiPoly> = (0..SUITE_POLYS).map(|_| random_poly(&mut rng, d, SUITE_DEGREE)).collect();
        let sups: Vec<_> = polys.iter().map(|p| polydisc_sup(p, &cfg.sup).unwrap()).collect();
        let tuples: Vec<CommutingTuple> = (0..SUITE_TUPLES)
            .map(|_| {
                if d == 1 {
                    CommutingTuple::dense(vec![random_contraction(&mut rng, SUITE_DIM)]).unwrap()
                } else {
                    let (a, b) = random_commuting_pair(&mut rng, SUITE_DIM);
                    CommutingTuple::dense(vec![a, b]).unwrap()
                }
            })
            .collect();
        let (mut violated, mut holds, mut inconclusive) = (0, 0, 0);
        let mut min_margin = f64::INFINITY;
        for t in &tuples {
            for (p, sup) in polys.iter().zip(&sups) {
                let r = check_vn_with_sup(t, p, sup, &cfg).unwrap();
                match r.verdict {
                    Verdict::Violated => violated += 1,
                    Verdict::Holds => holds += 1,
                    Verdict::Inconclusive => inconclusive += 1,
                }
                min_margin = min_margin.min(r.margin);
            }
        }
        passed &= violated == 0;
        details.push(format!("d={d}: {violated} violated, {holds} holds, {inconclusive} inconclusive, min margin {min_margin:.2e}"));
    }
    Outcome { passed, detail: details.join("; ") }
}

fn dense_norm(t: &CommutingTuple, p: &MultiPoly) -> f64 {
    let v = eval_poly_on_tuple(p, t).unwrap();
    v.densify().unwrap().op_norm().unwrap()
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();

    // commutativity of truncations
    let (a, b) = random_commuting_pair(&mut rng, 3);
    let tab = LatticeBox::new(vec![6, 6]).unwrap();
    let families = vec![
        WeightFamily::constant(vec![a, b]).unwrap(),
        WeightFamily::seeded_unitary(3, 2, 17).unwrap(),
        WeightFamily::diagonal(vec![
            ScalarWeights::from_potential(&tab, |x| 1.0 + (x[0] + 2 * x[1]) as f64),
            ScalarWeights::from_potential(&tab, |x| (0.3 * (x[0] * x[1]) as f64).exp()),
        ])
        .unwrap(),
    ];
    let mut worst_commuting: f64 = 0.0;
    for w in &families {
        let lbox = LatticeBox::cube(w.arity(), 4).unwrap();
        let report = validate_weights(w, &lbox).unwrap();
        let t = build_truncated_multishift(w, &lbox).unwrap();
        let rel = t.commutation_residual() / report.max_weight_norm.powi(2).max(f64::MIN_POSITIVE);
        worst_commuting = worst_commuting.max(rel);
    }
    if worst_commuting > COMMUTING_REL_TOL {
        failures.push("commutativity");
    }

    // nested boxes
    let mut worst_drop: f64 = 0.0;
    for d in 1..=3usize {
        let family = match d {
            1 => WeightFamily::constant(vec![random_contraction(&mut rng, 2)]).unwrap(),
            2 => {
                let (a, b) = random_commuting_pair(&mut rng, 2);
                WeightFamily::constant(vec![a, b]).unwrap()
            }
            _ => WeightFamily::seeded_unitary(3, 2, 23).unwrap(),
        };
        for _ in 0..4 {
            let p = random_poly(&mut rng, d, 4);
            let start = if d == 3 { 1 } else { 2 };
            let norms: Vec<f64> = (0..4)
                .map(|k| {
                    let lbox = LatticeBox::cube(d, start + k).unwrap();
                    dense_norm(&build_truncated_multishift(&family, &lbox).unwrap(), &p)
                })
                .collect();
            for pair in norms.windows(2) {
                worst_drop = worst_drop.max(pair[0] - pair[1]);
            }
        }
    }
    if worst_drop > MONOTONE_TOL {
        failures.push("box monotonicity");
    }

    // Kronecker norms
    let mut worst_kron: f64 = 0.0;
    for _ in 0..20 {
        let (r, s) = (rng.random_range(1..6), rng.random_range(1..6));
        let x = random_matrix(&mut rng, r, r);
        let y = random_matrix(&mut rng, s, s);
        let lhs = x.kron(&y).op_norm().unwrap();
        let rhs = x.op_norm().unwrap() * y.op_norm().unwrap();
        worst_kron = worst_kron.max((lhs - rhs).abs() / rhs.max(1.0));
    }
    if worst_kron > KRON_TOL {
        failures.push("kronecker");
    }

    // intertwiners between seeded unitary families
    let mut worst_intertwine: f64 = 0.0;
    for (d, n, s1, s2) in [(2, 3, 1, 2), (3, 2, 5, 6), (2, 4, 7, 7)] {
        let lbox = LatticeBox::cube(d, 4).unwrap();
        let it = unitary_intertwiner(
            &WeightFamily::seeded_unitary(d, n, s1).unwrap(),
            &WeightFamily::seeded_unitary(d, n, s2).unwrap(),
            &lbox,
        )
        .unwrap();
        let r = it.report();
        worst_intertwine = worst_intertwine.max(r.path_defect).max(r.intertwining_residual);
    }
    if worst_intertwine > INTERTWINER_TOL {
        failures.push("intertwiner");
    }

    // diagonal decomposition
    let diag = &families[2];
    let dec = decompose_diagonal(diag, &LatticeBox::new(vec![4, 3]).unwrap()).unwrap();
    let cert = dec.certify(&certificate_polynomials(2, 10, 5), &Default::default()).unwrap();
    if cert.max_gap > DECOMPOSITION_TOL {
        failures.push("decomposition");
    }

    Outcome {
        passed: failures.is_empty(),
        detail: format!(
            "commutator/‖A‖² {worst_commuting:.1e}, nested-box drop {worst_drop:.1e}, kron {worst_kron:.1e}, intertwiner {worst_intertwine:.1e}, decomposition gap {:.1e}{}",
            cert.max_gap,
            if failures.is_empty() { String::new() } else { format!("; failing: {failures:?}") }
        ),
    }
}

fn operator_valued_violation() -> Outcome {
    let start = Instant::now();
    let rows = varopoulos_witness_sweep(WITNESS_C, &WITNESS_SIDES).unwrap();
    let elapsed = start.elapsed();
    let monotone = rows.windows(2).all(|w| w[1].bound >= w[0].bound);
    let best = rows.iter().map(|r| r.bound).fold(f64::NEG_INFINITY, f64::max);
    let limit = guaranteed_lhs(WITNESS_C);
    let trend: Vec<String> = rows.iter().map(|r| format!("m={} {:.4}", r.side, r.bound)).collect();
    Outcome {
        passed: monotone && best > WITNESS_TARGET && elapsed < WITNESS_BUDGET,
        detail: format!(
            "[{}], monotone {monotone}, best {best:.4}, gap to 6(1-c)^2 = {limit:.4} is {:.4}, dim at m=40 {}, {:.2}s",
            trend.join(", "),
            limit - best,
            rows.last().map_or(0, |r| r.dim),
            elapsed.as_secs_f64()
        ),
    }
}

fn matrix_spot_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut violated, mut holds, mut inconclusive) = (0, 0, 0);
    for k in 0..MATRIX_POLYS {
        let d = 1 + k % 3;
        let sides: Vec<usize> = (0..d).map(|_| rng.random_range(2..=6)).collect();
        let t = truncated_unweighted_shift(&LatticeBox::new(sides).unwrap()).unwrap();
        let p = random_matrix_poly(&mut rng, d, 2, 3);
        let grid_n = [0, 200, 96, 40][d];
        let cfg = VnConfig { sup: SupConfig { grid_n, cert_tol: 1e-3, ..Default::default() }, ..Default::default() };
        let sup = polydisc_sup(&p, &cfg.sup).unwrap();
        match check_matrix_vn_with_sup(&t, &p, &sup, &cfg).unwrap().verdict {
            Verdict::Violated => violated += 1,
            Verdict::Holds => holds += 1,
            Verdict::Inconclusive => inconclusive += 1,
        }
    }
    Outcome {
        passed: violated == 0,
        detail: format!("{violated} violated, {holds} holds, {inconclusive} inconclusive over {MATRIX_POLYS} polynomials"),
    }
}

/// max |p| over the grid of `n` points per axis, offset by half a step.
fn brute_force_max(p: &MultiPoly, n: usize) -> f64 {
    let d = p.arity();
    let lbox = LatticeBox::cube(d, n).unwrap();
    let step = std::f64::consts::TAU / n as f64;
    lbox.iter()
        .map(|idx| {
            let z: Vec<C64> = idx.entries().iter().map(|&k| C64::from_polar(1.0, (k as f64 + 0.5) * step)).collect();
            p.eval(&z).unwrap().norm()
        })
        .fold(0.0, f64::max)
}

fn sup_certification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut exceed, mut not_monotone) = (0, 0);
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 0..SUP_POLYS {
        let d = 1 + k % 3;
        let p = random_poly(&mut rng, d, 4);
        let grid_n = [0, 64, 40, 20][d];
        let certified = polydisc_sup(&p, &SupConfig { grid_n, ..Default::default() }).unwrap();
        let brute = brute_force_max(&p, BRUTE_FACTOR * grid_n);
        worst_excess = worst_excess.max(brute - certified.upper);
        if brute > certified.upper {
            exceed += 1;
        }
        let plain = |g| SupConfig { grid_n: g, refine_steps: 0, cert_tol: 0.0, ..Default::default() };
        let coarse = polydisc_sup(&p, &plain(grid_n)).unwrap();
        let fine = polydisc_sup(&p, &plain(2 * grid_n)).unwrap();
        if fine.upper > coarse.upper || fine.lower < coarse.lower {
            not_monotone += 1;
        }
    }
    Outcome {
        passed: exceed == 0 && not_monotone == 0,
        detail: format!(
            "{exceed} brute-force excesses (max brute − upper {worst_excess:.2e}), {not_monotone} non-monotone brackets over {SUP_POLYS} polynomials"
        ),
    }
}

#[test]
fn acceptance_criteria() {
    assert!(Path::new(env!("CARGO_BIN_EXE_vnlab")).exists());
    let criteria: [Criterion; 8] = [
        ("counterexample reproduction", counterexample_reproduction),
        ("threshold fidelity", threshold_fidelity),
        ("oracle agreement", oracle_agreement),
        ("classical suites", classical_suites),
        ("structural invariants", structural_invariants),
        ("operator-valued violation", operator_valued_violation),
        ("matrix spot suite", matrix_spot_suite),
        ("sup certification", sup_certification),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        report(i + 1, name, &outcome, start.elapsed());
        if !outcome.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn sanity_of_pinned_constants() {
    assert!((guaranteed_lhs(EXAMPLE_C) - 5.415).abs() < 1e-12);
    assert!((guaranteed_lhs(WITNESS_C) - 5.7624).abs() < 1e-12);
}
