//! Weight families A_α^{(j)} and the rules that materialize them.
//!
//! A rule is looked up by its JSON `kind` in a [`WeightRuleRegistry`]; the
//! built-in kinds are `constant`, `diagonal`, `classical`, `table` and
//! `seeded_unitary`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{self, ComplexJson, MatrixJson};
use crate::lattice::{LatticeBox, MultiIndex};
use crate::linalg::DenseMatrix;
use crate::sampling::random_unitary;

/// Materializes the weight on fiber α along `axis` (0-based).
pub trait WeightRule: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;
    fn arity(&self) -> usize;
    fn fiber_dim(&self) -> usize;
    fn weight(&self, alpha: &[usize], axis: usize) -> Result<DenseMatrix>;
    /// Kind-specific JSON fields, without `kind`.
    fn payload(&self) -> Value;
    /// Per-coordinate scalar weights when every weight is diagonal by
    /// construction.
    fn diagonal_components(&self) -> Option<&[ScalarWeights]> {
        None
    }
}

/// Scalar weights w_α^{(j)}, either constant per axis or tabulated on a box.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarWeights {
    Constant(Vec<C64>),
    /// `values[axis][rank(α)]`
    Table { lbox: LatticeBox, values: Vec<Vec<C64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum ScalarWeightsJson {
    Constant(Vec<ComplexJson>),
    Table {
        #[serde(rename = "box")]
        sides: Vec<usize>,
        values: Vec<Vec<ComplexJson>>,
    },
}

impl ScalarWeights {
    /// Tabulated weights w_α^{(j)} = sqrt(β(α+ε_j)/β(α)) from a positive
    /// potential β. Any such table satisfies the commuting identity.
    pub fn from_potential(lbox: &LatticeBox, beta: impl Fn(&[usize]) -> f64) -> Self {
        let d = lbox.arity();
        let mut values = vec![Vec::with_capacity(lbox.volume()); d];
        for alpha in lbox.iter() {
            let a = alpha.entries();
            let here = beta(a);
            for (j, col) in values.iter_mut().enumerate() {
                let mut up = a.to_vec();
                up[j] += 1;
                col.push(C64::new((beta(&up) / here).sqrt(), 0.0));
            }
        }
        ScalarWeights::Table { lbox: lbox.clone(), values }
    }

    pub fn arity(&self) -> usize {
        match self {
            ScalarWeights::Constant(c) => c.len(),
            ScalarWeights::Table { lbox, .. } => lbox.arity(),
        }
    }

    pub fn weight(&self, alpha: &[usize], axis: usize) -> Result<C64> {
        match self {
            ScalarWeights::Constant(c) => Ok(c[axis]),
            ScalarWeights::Table { lbox, values } => {
                let idx = MultiIndex::new(alpha.to_vec());
                if !lbox.contains(&idx) {
                    return Err(Error::RuleDomainTooSmall(format!(
                        "{idx:?} outside the tabulated box {:?}",
                        lbox.sides()
                    )));
                }
                Ok(values[axis][lbox.rank_unchecked(alpha)])
            }
        }
    }

    fn validated(self, d: usize, path: &str) -> Result<Self> {
        if self.arity() != d {
            return Err(Error::malformed(path, format!("expected arity {d}, got {}", self.arity())));
        }
        if let ScalarWeights::Table { lbox, values } = &self {
            if values.len() != d {
                return Err(Error::malformed(format!("{path}.values"), format!("expected {d} axes")));
            }
            for (j, col) in values.iter().enumerate() {
                if col.len() != lbox.volume() {
                    return Err(Error::malformed(
                        format!("{path}.values[{j}]"),
                        format!("expected {} entries, got {}", lbox.volume(), col.len()),
                    ));
                }
            }
        }
        Ok(self)
    }

    fn to_json(&self) -> ScalarWeightsJson {
        match self {
            ScalarWeights::Constant(c) => ScalarWeightsJson::Constant(c.iter().map(|&z| z.into()).collect()),
            ScalarWeights::Table { lbox, values } => ScalarWeightsJson::Table {
                sides: lbox.sides().to_vec(),
                values: values.iter().map(|col| col.iter().map(|&z| z.into()).collect()).collect(),
            },
        }
    }

    fn from_json(j: ScalarWeightsJson, path: &str) -> Result<Self> {
        Ok(match j {
            ScalarWeightsJson::Constant(c) => ScalarWeights::Constant(c.into_iter().map(C64::from).collect()),
            ScalarWeightsJson::Table { sides, values } => ScalarWeights::Table {
                lbox: LatticeBox::new(sides).map_err(|e| Error::malformed(format!("{path}.box"), e.to_string()))?,
                values: values
                    .into_iter()
                    .map(|col| col.into_iter().map(C64::from).collect())
                    .collect(),
            },
        })
    }
}

#[derive(Debug)]
struct ConstantRule {
    matrices: Vec<DenseMatrix>,
}

impl WeightRule for ConstantRule {
    fn kind(&self) -> &'static str {
        "constant"
    }
    fn arity(&self) -> usize {
        self.matrices.len()
    }
    fn fiber_dim(&self) -> usize {
        self.matrices[0].rows()
    }
    fn weight(&self, _alpha: &[usize], axis: usize) -> Result<DenseMatrix> {
        Ok(self.matrices[axis].clone())
    }
    fn payload(&self) -> Value {
        let m: Vec<MatrixJson> = self.matrices.iter().map(json::matrix_to_json).collect();
        json!({ "matrices": m })
    }
}

#[derive(Debug)]
struct ClassicalRule {
    weights: [ScalarWeights; 1],
}

impl WeightRule for ClassicalRule {
    fn kind(&self) -> &'static str {
        "classical"
    }
    fn arity(&self) -> usize {
        self.weights[0].arity()
    }
    fn fiber_dim(&self) -> usize {
        1
    }
    fn weight(&self, alpha: &[usize], axis: usize) -> Result<DenseMatrix> {
        Ok(DenseMatrix::diagonal(&[self.weights[0].weight(alpha, axis)?]))
    }
    fn payload(&self) -> Value {
        json!({ "weights": self.weights[0].to_json() })
    }
    fn diagonal_components(&self) -> Option<&[ScalarWeights]> {
        Some(&self.weights)
    }
}

#[derive(Debug)]
struct DiagonalRule {
    components: Vec<ScalarWeights>,
}

impl WeightRule for DiagonalRule {
    fn kind(&self) -> &'static str {
        "diagonal"
    }
    fn arity(&self) -> usize {
        self.components[0].arity()
    }
    fn fiber_dim(&self) -> usize {
        self.components.len()
    }
    fn weight(&self, alpha: &[usize], axis: usize) -> Result<DenseMatrix> {
        let diag = self
            .components
            .iter()
            .map(|w| w.weight(alpha, axis))
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseMatrix::diagonal(&diag))
    }
    fn payload(&self) -> Value {
        let c: Vec<ScalarWeightsJson> = self.components.iter().map(ScalarWeights::to_json).collect();
        json!({ "components": c })
    }
    fn diagonal_components(&self) -> Option<&[ScalarWeights]> {
        Some(&self.components)
    }
}

/// One explicit weight in a `table` rule.
#[derive(Clone, Debug)]
pub struct TableEntry {
    pub alpha: MultiIndex,
    pub axis: usize,
    pub matrix: DenseMatrix,
}

#[derive(Debug)]
struct TableRule {
    lbox: LatticeBox,
    n: usize,
    entries: HashMap<(usize, usize), DenseMatrix>,
}

impl WeightRule for TableRule {
    fn kind(&self) -> &'static str {
        "table"
    }
    fn arity(&self) -> usize {
        self.lbox.arity()
    }
    fn fiber_dim(&self) -> usize {
        self.n
    }
    fn weight(&self, alpha: &[usize], axis: usize) -> Result<DenseMatrix> {
        let idx = MultiIndex::new(alpha.to_vec());
        if !self.lbox.contains(&idx) {
            return Err(Error::RuleDomainTooSmall(format!(
                "{idx:?} outside the declared box {:?}",
                self.lbox.sides()
            )));
        }
        let key = (self.lbox.rank_unchecked(alpha), axis);
        Ok(self
            .entries
            .get(&key)
            .cloned()
            .unwrap_or_else(|| DenseMatrix::zeros(self.n, self.n)))
    }
    fn payload(&self) -> Value {
        let mut keys: Vec<_> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        let entries: Vec<Value> = keys
            .into_iter()
            .map(|(r, axis)| {
                let alpha = self.lbox.unrank(r).expect("stored rank is inside the box");
                json!({ "alpha": alpha, "axis": axis, "matrix": json::matrix_to_json(&self.entries[&(r, axis)]) })
            })
            .collect();
        json!({ "box": self.lbox.sides(), "entries": entries })
    }
}

/// Constant unitary weights Q_j = U diag(e^{iθ_{j,k}}) U* sharing one
/// seeded eigenbasis U, so the Q_j commute.
#[derive(Debug)]
struct SeededUnitaryRule {
    seed: u64,
    unitaries: Vec<DenseMatrix>,
}

impl SeededUnitaryRule {
    fn new(d: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(&mut rng, n);
        let ustar = u.adjoint();
        let unitaries = (0..d)
            .map(|_| {
                let phases: Vec<C64> = (0..n)
                    .map(|_| C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
                    .collect();
                &(&u * &DenseMatrix::diagonal(&phases)) * &ustar
            })
            .collect();
        SeededUnitaryRule { seed, unitaries }
    }
}

impl WeightRule for SeededUnitaryRule {
    fn kind(&self) -> &'static str {
        "seeded_unitary"
    }
    fn arity(&self) -> usize {
        self.unitaries.len()
    }
    fn fiber_dim(&self) -> usize {
        self.unitaries[0].rows()
    }
    fn weight(&self, _alpha: &[usize], axis: usize) -> Result<DenseMatrix> {
        Ok(self.unitaries[axis].clone())
    }
    fn payload(&self) -> Value {
        json!({ "seed": self.seed })
    }
}

/// An operator-weight family on ℓ²_{ℂⁿ}(ℕ^d).
#[derive(Clone, Debug)]
pub struct WeightFamily {
    rule: Arc<dyn WeightRule>,
    contractive: bool,
}

impl WeightFamily {
    pub fn from_rule(rule: Arc<dyn WeightRule>) -> Result<Self> {
        if rule.arity() == 0 || rule.fiber_dim() == 0 {
            return Err(Error::InvalidInput("weight rule needs d ≥ 1 and n ≥ 1".into()));
        }
        Ok(WeightFamily { rule, contractive: false })
    }

    /// A_α^{(j)} = A_j for every α.
    pub fn constant(matrices: Vec<DenseMatrix>) -> Result<Self> {
        let n = matrices.first().map_or(0, DenseMatrix::rows);
        if matrices.iter().any(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::ShapeMismatch("constant weights must be square and of equal size".into()));
        }
        Self::from_rule(Arc::new(ConstantRule { matrices }))
    }

    /// All weights equal to the n×n identity.
    pub fn unweighted(d: usize, n: usize) -> Result<Self> {
        Self::constant(vec![DenseMatrix::identity(n); d])
    }

    pub fn classical(weights: ScalarWeights) -> Result<Self> {
        let d = weights.arity();
        let weights = weights.validated(d, "weights")?;
        Self::from_rule(Arc::new(ClassicalRule { weights: [weights] }))
    }

    pub fn diagonal(components: Vec<ScalarWeights>) -> Result<Self> {
        let d = components.first().map_or(0, ScalarWeights::arity);
        let components = components
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.validated(d, &format!("components[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        if components.is_empty() {
            return Err(Error::InvalidInput("diagonal rule needs at least one component".into()));
        }
        Self::from_rule(Arc::new(DiagonalRule { components }))
    }

    /// Explicit weights on `lbox`; missing entries inside the box are zero.
    pub fn table(lbox: LatticeBox, n: usize, entries: Vec<TableEntry>) -> Result<Self> {
        let mut map = HashMap::new();
        for (k, e) in entries.into_iter().enumerate() {
            let path = format!("entries[{k}]");
            if e.alpha.arity() != lbox.arity() {
                return Err(Error::malformed(format!("{path}.alpha"), "arity differs from the box"));
            }
            let r = lbox
                .rank(&e.alpha)
                .map_err(|err| Error::malformed(format!("{path}.alpha"), err.to_string()))?;
            if e.axis >= lbox.arity() {
                return Err(Error::malformed(format!("{path}.axis"), format!("axis {} out of range", e.axis)));
            }
            if e.matrix.rows() != n || e.matrix.cols() != n {
                return Err(Error::malformed(format!("{path}.matrix"), format!("expected {n}x{n}")));
            }
            if map.insert((r, e.axis), e.matrix).is_some() {
                return Err(Error::malformed(path, "duplicate (alpha, axis)"));
            }
        }
        Self::from_rule(Arc::new(TableRule { lbox, n, entries: map }))
    }

    pub fn seeded_unitary(d: usize, n: usize, seed: u64) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidInput("seeded unitary rule needs d ≥ 1 and n ≥ 1".into()));
        }
        Self::from_rule(Arc::new(SeededUnitaryRule::new(d, n, seed)))
    }

    /// Require every materialized weight to be a contraction.
    pub fn with_contractive(mut self, contractive: bool) -> Self {
        self.contractive = contractive;
        self
    }

    pub fn arity(&self) -> usize {
        self.rule.arity()
    }

    pub fn fiber_dim(&self) -> usize {
        self.rule.fiber_dim()
    }

    pub fn kind(&self) -> &'static str {
        self.rule.kind()
    }

    pub fn is_contractive_required(&self) -> bool {
        self.contractive
    }

    pub fn rule(&self) -> &dyn WeightRule {
        self.rule.as_ref()
    }

    pub fn weight(&self, alpha: &MultiIndex, axis: usize) -> Result<DenseMatrix> {
        if alpha.arity() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), got: alpha.arity() });
        }
        if axis >= self.arity() {
            return Err(Error::InvalidInput(format!("axis {axis} out of range for d = {}", self.arity())));
        }
        self.rule.weight(alpha.entries(), axis)
    }

    pub(crate) fn weight_raw(&self, alpha: &[usize], axis: usize) -> Result<DenseMatrix> {
        self.rule.weight(alpha, axis)
    }

    pub fn to_json(&self) -> Value {
        let mut rule = self.rule.payload();
        rule.as_object_mut()
            .expect("rule payloads are objects")
            .insert("kind".into(), Value::String(self.kind().into()));
        let mut out = json!({ "d": self.arity(), "n": self.fiber_dim(), "rule": rule });
        if self.contractive {
            out["contractive"] = Value::Bool(true);
        }
        out
    }

    /// Parses a family document with the built-in rule kinds.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &WeightRuleRegistry::with_builtins())
    }

    pub fn parse_with(text: &str, registry: &WeightRuleRegistry) -> Result<Self> {
        let doc: FamilyJson = json::from_str(text)?;
        registry.build(doc)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyJson {
    d: usize,
    n: usize,
    #[serde(default)]
    contractive: bool,
    rule: serde_json::Map<String, Value>,
}

/// Builds a rule of one kind from its JSON payload, given d and n.
pub type RuleFactory = fn(d: usize, n: usize, payload: Value) -> Result<Arc<dyn WeightRule>>;

/// Kind name → rule factory.
pub struct WeightRuleRegistry {
    factories: BTreeMap<&'static str, RuleFactory>,
}

fn prefixed(err: Error, prefix: &str) -> Error {
    match err {
        Error::Malformed { path, message } => {
            let path = if path.is_empty() || path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
            Error::Malformed { path, message }
        }
        other => Error::malformed(prefix, other.to_string()),
    }
}

fn parse_payload<T: serde::de::DeserializeOwned>(payload: Value) -> Result<T> {
    json::from_value(payload).map_err(|e| prefixed(e, "rule"))
}

fn check_shape(d: usize, n: usize, rule: &dyn WeightRule) -> Result<()> {
    if rule.arity() != d {
        return Err(Error::malformed("d", format!("rule has arity {}, document says {d}", rule.arity())));
    }
    if rule.fiber_dim() != n {
        return Err(Error::malformed("n", format!("rule has fiber dimension {}, document says {n}", rule.fiber_dim())));
    }
    Ok(())
}

fn constant_factory(d: usize, n: usize, payload: Value) -> Result<Arc<dyn WeightRule>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        matrices: Vec<MatrixJson>,
    }
    let p: P = parse_payload(payload)?;
    if p.matrices.len() != d {
        return Err(Error::malformed("rule.matrices", format!("expected {d} matrices, got {}", p.matrices.len())));
    }
    let mut mats = Vec::with_capacity(d);
    for (j, m) in p.matrices.iter().enumerate() {
        let path = format!("rule.matrices[{j}]");
        let m = json::matrix_from_json(m, &path)?;
        if m.rows() != n || m.cols() != n {
            return Err(Error::malformed(path, format!("expected {n}x{n}")));
        }
        mats.push(m);
    }
    Ok(Arc::new(ConstantRule { matrices: mats }))
}

fn classical_factory(d: usize, n: usize, payload: Value) -> Result<Arc<dyn WeightRule>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        weights: ScalarWeightsJson,
    }
    if n != 1 {
        return Err(Error::malformed("n", "classical weights are scalar; n must be 1"));
    }
    let p: P = parse_payload(payload)?;
    let w = ScalarWeights::from_json(p.weights, "rule.weights")?.validated(d, "rule.weights")?;
    Ok(Arc::new(ClassicalRule { weights: [w] }))
}

fn diagonal_factory(d: usize, n: usize, payload: Value) -> Result<Arc<dyn WeightRule>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        components: Vec<ScalarWeightsJson>,
    }
    let p: P = parse_payload(payload)?;
    if p.components.len() != n {
        return Err(Error::malformed("rule.components", format!("expected {n} components, got {}", p.components.len())));
    }
    let components = p
        .components
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let path = format!("rule.components[{k}]");
            ScalarWeights::from_json(c, &path)?.validated(d, &path)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(DiagonalRule { components }))
}

fn table_factory(d: usize, n: usize, payload: Value) -> Result<Arc<dyn WeightRule>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Entry {
        alpha: Vec<usize>,
        axis: usize,
        matrix: MatrixJson,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        #[serde(rename = "box")]
        sides: Vec<usize>,
        entries: Vec<Entry>,
    }
    let p: P = parse_payload(payload)?;
    if p.sides.len() != d {
        return Err(Error::malformed("rule.box", format!("expected {d} sides")));
    }
    let lbox = LatticeBox::new(p.sides).map_err(|e| Error::malformed("rule.box", e.to_string()))?;
    let mut entries = Vec::with_capacity(p.entries.len());
    for (k, e) in p.entries.into_iter().enumerate() {
        let path = format!("rule.entries[{k}]");
        if e.alpha.len() != d {
            return Err(Error::malformed(format!("{path}.alpha"), format!("expected {d} exponents")));
        }
        entries.push(TableEntry {
            alpha: MultiIndex::new(e.alpha),
            axis: e.axis,
            matrix: json::matrix_from_json(&e.matrix, &format!("{path}.matrix"))?,
        });
    }
    let family = WeightFamily::table(lbox, n, entries).map_err(|e| prefixed(e, "rule"))?;
    Ok(family.rule)
}

fn seeded_unitary_factory(d: usize, n: usize, payload: Value) -> Result<Arc<dyn WeightRule>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct P {
        seed: u64,
    }
    let p: P = parse_payload(payload)?;
    Ok(Arc::new(SeededUnitaryRule::new(d, n, p.seed)))
}

impl WeightRuleRegistry {
    pub fn empty() -> Self {
        WeightRuleRegistry { factories: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("constant", constant_factory);
        r.register("classical", classical_factory);
        r.register("diagonal", diagonal_factory);
        r.register("table", table_factory);
        r.register("seeded_unitary", seeded_unitary_factory);
        r
    }

    pub fn register(&mut self, kind: &'static str, factory: RuleFactory) {
        self.factories.insert(kind, factory);
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    fn build(&self, mut doc: FamilyJson) -> Result<WeightFamily> {
        if doc.d == 0 {
            return Err(Error::malformed("d", "arity must be at least 1"));
        }
        if doc.n == 0 {
            return Err(Error::malformed("n", "fiber dimension must be at least 1"));
        }
        let kind = match doc.rule.remove("kind") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(Error::malformed("rule.kind", "expected a string")),
            None => return Err(Error::malformed("rule.kind", "missing field `kind`")),
        };
        let factory = self.factories.get(kind.as_str()).ok_or_else(|| {
            Error::malformed("rule.kind", format!("unknown kind `{kind}`; known: {}", self.kinds().join(", ")))
        })?;
        let rule = factory(doc.d, doc.n, Value::Object(doc.rule))?;
        check_shape(doc.d, doc.n, rule.as_ref())?;
        Ok(WeightFamily::from_rule(rule)?.with_contractive(doc.contractive))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(w: &WeightFamily) -> WeightFamily {
        WeightFamily::parse(&w.to_json().to_string()).unwrap()
    }

    #[test]
    fn every_builtin_kind_roundtrips() {
        let b = LatticeBox::new(vec![3, 2]).unwrap();
        let fams = vec![
            WeightFamily::constant(vec![DenseMatrix::from_real_rows(&[&[0.0, 1.0], &[0.5, 0.0]]), DenseMatrix::identity(2)]).unwrap(),
            WeightFamily::classical(ScalarWeights::Constant(vec![C64::new(0.5, 0.0), C64::new(0.0, 1.0)])).unwrap(),
            WeightFamily::diagonal(vec![
                ScalarWeights::from_potential(&b, |a| 1.0 + (a[0] + 2 * a[1]) as f64),
                ScalarWeights::Constant(vec![C64::new(1.0, 0.0); 2]),
            ])
            .unwrap(),
            WeightFamily::table(
                b.clone(),
                1,
                vec![TableEntry { alpha: MultiIndex::new(vec![2, 1]), axis: 1, matrix: DenseMatrix::identity(1) }],
            )
            .unwrap(),
            WeightFamily::seeded_unitary(2, 3, 9).unwrap(),
        ];
        for w in &fams {
            let back = roundtrip(w);
            assert_eq!(back.kind(), w.kind());
            assert_eq!(back.to_json(), w.to_json());
            for alpha in b.iter() {
                for j in 0..2 {
                    assert_eq!(back.weight(&alpha, j).unwrap(), w.weight(&alpha, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn table_outside_declared_box() {
        let w = WeightFamily::table(LatticeBox::new(vec![2, 2]).unwrap(), 1, vec![]).unwrap();
        assert_eq!(w.weight(&MultiIndex::new(vec![1, 1]), 0).unwrap(), DenseMatrix::zeros(1, 1));
        assert!(matches!(w.weight(&MultiIndex::new(vec![2, 0]), 0), Err(Error::RuleDomainTooSmall(_))));
    }

    #[test]
    fn seeded_unitaries_commute_and_are_unitary() {
        let w = WeightFamily::seeded_unitary(3, 4, 11).unwrap();
        let z = MultiIndex::zero(3);
        let q: Vec<_> = (0..3).map(|j| w.weight(&z, j).unwrap()).collect();
        for a in &q {
            assert!(a.unitarity_defect().unwrap() < 1e-12);
            for b in &q {
                assert!((a * b).sub(&(b * a)).unwrap().op_norm().unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn malformed_documents_name_the_path() {
        let cases = [
            (r#"{"d":1,"n":1,"rule":{"kind":"warp"}}"#, "rule.kind"),
            (r#"{"d":1,"n":1,"rule":{}}"#, "rule.kind"),
            (r#"{"d":2,"n":1,"rule":{"kind":"constant","matrices":[[[{"re":1}]],[[{"re":"x"}]]]}}"#, "rule.matrices[1][0][0].re"),
            (r#"{"d":1,"n":2,"rule":{"kind":"classical","weights":{"constant":[{"re":1}]}}}"#, "n"),
            (r#"{"d":1,"n":1,"rule":{"kind":"table","box":[2],"entries":[{"alpha":[5],"axis":0,"matrix":[[{"re":1}]]}]}}"#, "rule.entries[0].alpha"),
            (r#"{"d":1,"n":1,"rule":{"kind":"seeded_unitary","seed":1,"extra":2}}"#, "rule.extra"),
        ];
        for (text, want) in cases {
            match WeightFamily::parse(text) {
                Err(Error::Malformed { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn registry_accepts_custom_kinds() {
        fn zero_rule(d: usize, n: usize, _: Value) -> Result<Arc<dyn WeightRule>> {
            Ok(WeightFamily::constant(vec![DenseMatrix::zeros(n, n); d])?.rule)
        }
        let mut reg = WeightRuleRegistry::with_builtins();
        reg.register("zero", zero_rule);
        let w = WeightFamily::parse_with(r#"{"d":2,"n":3,"rule":{"kind":"zero"}}"#, &reg).unwrap();
        assert_eq!(w.weight(&MultiIndex::zero(2), 1).unwrap(), DenseMatrix::zeros(3, 3));
    }
}
