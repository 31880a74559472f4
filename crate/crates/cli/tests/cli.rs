use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_conforms(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn vnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vnlab"))
        .args(args)
        .env_remove("VNLAB_SEED")
        .env_remove("VNLAB_THREADS")
        .output()
        .unwrap()
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rejected_table_exits_two() {
    let out = vnlab(&["validate", path(&fixture("rejected_table.json")), "--box", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_out(&out);
    assert_conforms("validation.schema.json", &v);
    assert_eq!(v["accepted"], false);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((v["max_commutation_defect"].as_f64().unwrap() - golden).abs() < 1e-12);
}

#[test]
fn unweighted_family_is_accepted() {
    let out = vnlab(&["validate", path(&fixture("unweighted_d2.json")), "--box", "3,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_out(&out)["accepted"], true);
}

#[test]
fn contraction_fixture_holds() {
    let out = vnlab(&["check", "--tuple", path(&fixture("contraction_d1.json")), "--poly", path(&fixture("poly_d1.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_out(&out);
    assert_conforms("report.schema.json", &v);
    assert_conforms("polynomial.schema.json", &v["polynomial"]);
    assert_eq!(v["verdict"], "holds");
    assert!(v["margin"].as_f64().unwrap() >= 0.0);
}

#[test]
fn builtin_counterexample_is_violated() {
    let out = vnlab(&["check", "--varopoulos", "0.05", "--pv"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json_out(&out);
    assert_conforms("report.schema.json", &v);
    assert_eq!(v["verdict"], "violated");
    assert!(v["margin"].as_f64().unwrap() >= 0.4);
    assert!(v["lhs"]["value"].as_f64().unwrap() >= 6.0 * 0.95 * 0.95);
}

#[test]
fn non_contractive_tuple_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let tuple = dir.path().join("big.json");
    std::fs::write(&tuple, r#"{"matrices":[[[{"re":2.0}]]]}"#).unwrap();
    let poly = dir.path().join("z.json");
    std::fs::write(&poly, r#"{"d":1,"terms":[{"alpha":[1],"re":1.0}]}"#).unwrap();
    let out = vnlab(&["check", "--tuple", path(&tuple), "--poly", path(&poly), "--grid-n", "32"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json_out(&out);
    assert_eq!(v["contractive"], false);
    assert_eq!(v["verdict"], "inconclusive");
}

#[test]
fn matrix_polynomial_on_shift_holds() {
    let out = vnlab(&[
        "check",
        "--weights",
        path(&fixture("unweighted_d2.json")),
        "--box",
        "3,3",
        "--poly",
        path(&fixture("matrix_poly_d2.json")),
        "--grid-n",
        "64",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_conforms("report.schema.json", &json_out(&out));
}

#[test]
fn rejected_weights_in_check_exit_two() {
    let out = vnlab(&[
        "check",
        "--weights",
        path(&fixture("rejected_table.json")),
        "--box",
        "1,1",
        "--poly",
        path(&fixture("poly_d2.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_inputs_name_the_json_path() {
    let out = vnlab(&["validate", path(&fixture("malformed_weights.json")), "--box", "1,1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rule.matrices[1][0][0].re"), "{err}");
    assert!(err.contains("malformed_weights.json"), "{err}");

    let out = vnlab(&["check", "--tuple", path(&fixture("contraction_d1.json")), "--poly", path(&fixture("malformed_poly.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("terms[1].alpha"));

    let out = vnlab(&["validate", path(&fixture("missing.json")), "--box", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn arity_mismatch_is_an_input_error() {
    let out = vnlab(&["check", "--tuple", path(&fixture("contraction_d1.json")), "--poly", path(&fixture("poly_d2.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let out = vnlab(&["validate", path(&fixture("unweighted_d2.json")), "--box", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let file = dir.path().join(name);
        let out = vnlab(&[
            "--seed",
            seed,
            "check",
            "--weights",
            path(&fixture("unweighted_d2.json")),
            "--box",
            "4,4",
            "--poly",
            path(&fixture("poly_d2.json")),
            "--norm-method",
            "power-iteration",
            "--grid-n",
            "48",
            "--output",
            path(&file),
        ]);
        assert!(out.stdout.is_empty());
        std::fs::read(file).unwrap()
    };
    let a = run("a.json", "3");
    let b = run("b.json", "3");
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_conforms("report.schema.json", &v);
    assert_eq!(v["lhs"]["method"], "power-iteration");
}

#[test]
fn environment_overrides_are_read() {
    let out = Command::new(env!("CARGO_BIN_EXE_vnlab"))
        .args(["check", "--varopoulos", "0.3", "--pv", "--grid-n", "40"])
        .env("VNLAB_SEED", "11")
        .env("VNLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(3) | Some(4)), "{}", String::from_utf8_lossy(&out.stderr));
    let bad = Command::new(env!("CARGO_BIN_EXE_vnlab"))
        .args(["check", "--varopoulos", "0.3", "--pv"])
        .env("VNLAB_SEED", "not a number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("VNLAB_SEED") || String::from_utf8_lossy(&bad.stderr).contains("--seed"));
}

#[test]
fn sweep_reports_the_boundary() {
    let out = vnlab(&["sweep", "--c-from", "0.06", "--c-to", "0.11", "--steps", "10", "--grid-n", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_conforms("sweep.schema.json", &v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    let b = v["certified_boundary"].as_f64().unwrap();
    assert!((b - 1.0 / (6.0 + 30f64.sqrt())).abs() < 0.005, "{b}");
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("violated verdicts"), "{summary}");
}

#[test]
fn intertwiner_between_seeded_unitaries() {
    let out = vnlab(&["intertwine", path(&fixture("unitary_a.json")), path(&fixture("unitary_b.json")), "--box", "3,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_conforms("intertwiner.schema.json", &v);
    assert!(v["intertwining_residual"].as_f64().unwrap() <= 1e-9);
    assert!(v["path_defect"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn intertwiner_refuses_non_unitary_weights() {
    let dir = tempfile::tempdir().unwrap();
    let half = dir.path().join("half.json");
    std::fs::write(&half, r#"{"d":2,"n":1,"rule":{"kind":"constant","matrices":[[[{"re":0.5}]],[[{"re":1.0}]]]}}"#).unwrap();
    let out = vnlab(&["intertwine", path(&half), path(&fixture("unweighted_d2.json")), "--box", "2,2"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let mismatch = vnlab(&["intertwine", path(&fixture("diagonal_d2.json")), path(&fixture("unitary_a.json")), "--box", "2,2"]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn decomposition_of_diagonal_family() {
    let out = vnlab(&["decompose", path(&fixture("diagonal_d2.json")), "--box", "3,3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_conforms("decomposition.schema.json", &v);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    for c in comps {
        assert_conforms("weights.schema.json", c);
        assert_eq!(c["n"], 1);
    }
    assert!(v["certificate"]["max_gap"].as_f64().unwrap() <= 1e-8);

    let refused = vnlab(&["decompose", path(&fixture("unitary_a.json")), "--box", "2,2"]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn decomposed_components_reparse_as_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = vnlab(&["decompose", path(&fixture("diagonal_d2.json")), "--box", "2,2"]);
    let v = json_out(&out);
    for (k, c) in v["components"].as_array().unwrap().iter().enumerate() {
        let file = dir.path().join(format!("c{k}.json"));
        std::fs::write(&file, serde_json::to_string(c).unwrap()).unwrap();
        let check = vnlab(&["validate", path(&file), "--box", "2,2"]);
        assert_eq!(check.status.code(), Some(0));
    }
}

#[test]
fn reproduce_example_default() {
    let out = vnlab(&["reproduce-example"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_out(&out);
    assert_conforms("example.schema.json", &v);
    assert_conforms("report.schema.json", &v["report"]);
    assert_eq!(v["reproduced"], true);
    assert_eq!(v["report"]["verdict"], "violated");
}

#[test]
fn reproduce_example_past_the_threshold_is_not_reproduced() {
    let out = vnlab(&["reproduce-example", "--c", "0.3", "--grid-n", "60"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(json_out(&out)["reproduced"], false);
}

#[test]
fn fixtures_conform_to_input_schemas() {
    for name in ["rejected_table.json", "unweighted_d2.json", "diagonal_d2.json", "unitary_a.json", "unitary_b.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        assert_conforms("weights.schema.json", &v);
    }
    for name in ["poly_d1.json", "poly_d2.json", "matrix_poly_d2.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        assert_conforms("polynomial.schema.json", &v);
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(fixture("contraction_d1.json")).unwrap()).unwrap();
    assert_conforms("tuple.schema.json", &v);
    let bad: Value = serde_json::from_str(&std::fs::read_to_string(fixture("malformed_weights.json")).unwrap()).unwrap();
    assert!(!schema("weights.schema.json").is_valid(&bad));
}
