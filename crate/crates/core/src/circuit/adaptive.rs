use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::json::{layers_from_json, layers_to_json};
use super::{Circuit, Layer, NonadaptiveCircuit, PlacedGate};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::statevector::StateVector;

/// Default cap on the number of intermediate outcome bits that
/// [`enumerate_outcome_tree`] will walk.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// One measurement of a stage: a standard-basis measurement of one qubit, or
/// a Bell measurement of a pair (two outcome bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measurement {
    Standard(usize),
    Bell(usize, usize),
}

impl Measurement {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Measurement::Standard(q) => vec![q],
            Measurement::Bell(a, b) => vec![a, b],
        }
    }

    pub fn bit_count(&self) -> usize {
        match self {
            Measurement::Standard(_) => 1,
            Measurement::Bell(..) => 2,
        }
    }

    /// The gate that rotates this measurement's basis onto the standard
    /// basis, with its targets.
    pub fn rotation(&self) -> Option<PlacedGate> {
        match *self {
            Measurement::Standard(_) => None,
            Measurement::Bell(a, b) => Some(PlacedGate::new(Gate::bell_rotation(), vec![a, b])),
        }
    }

    fn perform<R: Rng + ?Sized>(&self, state: &mut StateVector, rng: &mut R) -> Result<BitString> {
        Ok(match *self {
            Measurement::Standard(q) => state.measure_standard(q, rng)?.bits,
            Measurement::Bell(a, b) => state.measure_bell(a, b, rng)?.bits,
        })
    }
}

/// Classical rule choosing a stage's circuit from the outcomes of all
/// earlier stages.
pub trait ContinuationRule: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Number of prior outcome bits the rule reads, or `None` if it ignores
    /// them altogether.
    fn arity(&self) -> Option<usize>;

    /// The stage circuit for the given prior outcomes (one string per
    /// earlier stage). The returned circuit has no measured qubits.
    fn circuit(&self, prior: &[BitString]) -> Result<Circuit>;

    /// JSON form for registered rules.
    fn to_json(&self) -> Option<Value> {
        None
    }
}

/// A stage circuit that does not depend on earlier outcomes.
#[derive(Clone, Debug)]
pub struct FixedRule {
    circuit: Circuit,
}

impl FixedRule {
    pub fn new(circuit: Circuit) -> Self {
        Self { circuit }
    }

    pub fn layers(width: usize, layers: Vec<Layer>) -> Result<Self> {
        Ok(Self::new(Circuit::new(width, layers, Vec::new())?))
    }
}

impl ContinuationRule for FixedRule {
    fn name(&self) -> &str {
        "fixed"
    }

    fn arity(&self) -> Option<usize> {
        None
    }

    fn circuit(&self, _prior: &[BitString]) -> Result<Circuit> {
        Ok(self.circuit.clone())
    }

    fn to_json(&self) -> Option<Value> {
        Some(json!({ "name": "fixed", "layers": layers_to_json(self.circuit.layers()) }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledPauli {
    /// Index into the concatenation of all prior outcome bits.
    pub bit: usize,
    pub pauli: PauliName,
    pub target: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliName {
    X,
    Y,
    Z,
}

impl PauliName {
    fn gate(self) -> Gate {
        match self {
            PauliName::X => Gate::x(),
            PauliName::Y => Gate::y(),
            PauliName::Z => Gate::z(),
        }
    }
}

/// Base layers followed by one layer of Paulis, each applied iff its
/// control bit among the prior outcomes is 1.
#[derive(Clone, Debug)]
pub struct ControlledPauliRule {
    base: Circuit,
    controls: Vec<ControlledPauli>,
    arity: usize,
}

impl ControlledPauliRule {
    pub fn new(base: Circuit, controls: Vec<ControlledPauli>, arity: usize) -> Result<Self> {
        for c in &controls {
            if c.bit >= arity {
                return Err(Error::InvalidParameter(format!(
                    "control bit {} outside the {arity} prior bits",
                    c.bit
                )));
            }
            if c.target >= base.width() {
                return Err(Error::QubitOutOfRange {
                    qubit: c.target,
                    width: base.width(),
                });
            }
        }
        Ok(Self {
            base,
            controls,
            arity,
        })
    }
}

impl ContinuationRule for ControlledPauliRule {
    fn name(&self) -> &str {
        "controlled_pauli"
    }

    fn arity(&self) -> Option<usize> {
        Some(self.arity)
    }

    fn circuit(&self, prior: &[BitString]) -> Result<Circuit> {
        let bits = BitString::concat(prior);
        if bits.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: bits.len(),
            });
        }
        let mut per_target: Vec<(usize, Gate)> = Vec::new();
        for c in self.controls.iter().filter(|c| bits.get(c.bit) == 1) {
            match per_target.iter_mut().find(|(t, _)| *t == c.target) {
                Some((_, g)) => *g = c.pauli.gate().compose(g),
                None => per_target.push((c.target, c.pauli.gate())),
            }
        }
        let (width, mut layers, _) = self.base.clone().into_parts();
        if !per_target.is_empty() {
            layers.push(
                per_target
                    .into_iter()
                    .map(|(t, g)| PlacedGate::new(g, vec![t]))
                    .collect(),
            );
        }
        Circuit::new(width, layers, Vec::new())
    }

    fn to_json(&self) -> Option<Value> {
        Some(json!({
            "name": "controlled_pauli",
            "layers": layers_to_json(self.base.layers()),
            "controls": self.controls,
            "arity": self.arity,
        }))
    }
}

/// A rule backed by an arbitrary closure; not serializable.
pub struct FnRule<F> {
    name: String,
    arity: Option<usize>,
    f: F,
}

impl<F> FnRule<F>
where
    F: Fn(&[BitString]) -> Result<Circuit> + Send + Sync,
{
    pub fn new(name: impl Into<String>, arity: Option<usize>, f: F) -> Self {
        Self {
            name: name.into(),
            arity,
            f,
        }
    }
}

impl<F> fmt::Debug for FnRule<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnRule").field("name", &self.name).finish()
    }
}

impl<F> ContinuationRule for FnRule<F>
where
    F: Fn(&[BitString]) -> Result<Circuit> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn arity(&self) -> Option<usize> {
        self.arity
    }

    fn circuit(&self, prior: &[BitString]) -> Result<Circuit> {
        (self.f)(prior)
    }
}

type RuleParser = fn(&Value, usize) -> Result<Arc<dyn ContinuationRule>>;

/// Named rule constructors used when reading adaptive circuits from JSON.
pub struct RuleRegistry {
    parsers: HashMap<String, RuleParser>,
}

impl Default for RuleRegistry {
    fn default() -> Self {
        let mut r = Self {
            parsers: HashMap::new(),
        };
        r.register("fixed", |v, width| {
            let layers = layers_from_json(field(v, "layers")?)?;
            Ok(Arc::new(FixedRule::layers(width, layers)?))
        });
        r.register("controlled_pauli", |v, width| {
            let layers = layers_from_json(field(v, "layers")?)?;
            let controls: Vec<ControlledPauli> = serde_json::from_value(field(v, "controls")?.clone())?;
            let arity = field(v, "arity")?
                .as_u64()
                .ok_or_else(|| Error::Format("`arity` must be an integer".into()))?;
            let base = Circuit::new(width, layers, Vec::new())?;
            Ok(Arc::new(ControlledPauliRule::new(base, controls, arity as usize)?))
        });
        r
    }
}

impl RuleRegistry {
    pub fn register(&mut self, name: &str, parser: RuleParser) {
        self.parsers.insert(name.to_string(), parser);
    }

    pub fn parse(&self, value: &Value, width: usize) -> Result<Arc<dyn ContinuationRule>> {
        let name = field(value, "name")?
            .as_str()
            .ok_or_else(|| Error::Format("rule `name` must be a string".into()))?;
        let parser = self
            .parsers
            .get(name)
            .ok_or_else(|| Error::Format(format!("unknown continuation rule `{name}`")))?;
        parser(value, width)
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Format(format!("missing field `{key}`")))
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub rule: Arc<dyn ContinuationRule>,
    pub measure: Vec<Measurement>,
}

impl Stage {
    pub fn new(rule: Arc<dyn ContinuationRule>, measure: Vec<Measurement>) -> Self {
        Self { rule, measure }
    }

    pub fn bit_count(&self) -> usize {
        self.measure.iter().map(Measurement::bit_count).sum()
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.measure.iter().flat_map(|m| m.qubits()).collect()
    }
}

/// A composed circuit whose later stages may depend on earlier outcomes.
///
/// Qubit indices are stable for the whole run: a measured qubit stays in
/// the register but is consumed, and no later stage may touch it. The last
/// stage's measurement is the final output; the others are intermediate.
#[derive(Clone, Debug)]
pub struct AdaptiveCircuit {
    width: usize,
    input: String,
    prep: Circuit,
    stages: Vec<Stage>,
}

impl AdaptiveCircuit {
    /// `prep` holds the layers preparing the initial register from
    /// `|0...0>`; its measured list is ignored.
    pub fn new(width: usize, input: impl Into<String>, prep: Vec<Layer>, stages: Vec<Stage>) -> Result<Self> {
        let prep = Circuit::new(width, prep, Vec::new())?;
        if stages.is_empty() {
            return Err(Error::InvalidParameter("an adaptive circuit needs at least one stage".into()));
        }
        let mut seen = vec![false; width];
        let mut prior_bits = 0;
        for (s, stage) in stages.iter().enumerate() {
            for q in stage.qubits() {
                if q >= width {
                    return Err(Error::QubitOutOfRange { qubit: q, width });
                }
                if seen[q] {
                    return Err(Error::ConsumedQubit { stage: s, qubit: q });
                }
                seen[q] = true;
            }
            if let Some(a) = stage.rule.arity() {
                if a != prior_bits {
                    return Err(Error::Rule {
                        stage: s,
                        rule: stage.rule.name().to_string(),
                        message: format!("reads {a} prior bits but {prior_bits} are available"),
                    });
                }
            }
            prior_bits += stage.bit_count();
        }
        Ok(Self {
            width,
            input: input.into(),
            prep,
            stages,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn prep(&self) -> &Circuit {
        &self.prep
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Number of intermediate outcome bits (all stages but the last).
    pub fn intermediate_bits(&self) -> usize {
        self.stages[..self.stages.len() - 1]
            .iter()
            .map(Stage::bit_count)
            .sum()
    }

    pub fn final_stage(&self) -> &Stage {
        self.stages.last().expect("at least one stage")
    }

    /// Splits a concatenated intermediate outcome string into per-stage
    /// strings.
    pub fn split_intermediate(&self, bits: &BitString) -> Result<Vec<BitString>> {
        if bits.len() != self.intermediate_bits() {
            return Err(Error::GuessLength {
                expected: self.intermediate_bits(),
                found: bits.len(),
            });
        }
        let mut out = Vec::new();
        let mut at = 0;
        for stage in &self.stages[..self.stages.len() - 1] {
            let n = stage.bit_count();
            out.push(bits.slice(at, at + n));
            at += n;
        }
        Ok(out)
    }

    /// Evaluates stage `s`'s rule and checks the result against the register
    /// and the qubits consumed by stages before `s`.
    pub fn stage_circuit(&self, s: usize, prior: &[BitString]) -> Result<Circuit> {
        let stage = &self.stages[s];
        let rule_err = |message: String| Error::Rule {
            stage: s,
            rule: stage.rule.name().to_string(),
            message,
        };
        let c = stage.rule.circuit(prior).map_err(|e| rule_err(e.to_string()))?;
        if c.width() != self.width {
            return Err(rule_err(format!("circuit width {} != {}", c.width(), self.width)));
        }
        let consumed: Vec<usize> = self.stages[..s].iter().flat_map(Stage::qubits).collect();
        for (_, pg) in c.gates() {
            if let Some(&q) = pg.targets.iter().find(|q| consumed.contains(q)) {
                return Err(Error::ConsumedQubit { stage: s, qubit: q });
            }
        }
        Ok(c)
    }

    /// The nonadaptive circuit obtained by replacing every outcome a rule
    /// reads with the corresponding bits of `guess` and deferring all
    /// measurements to the end. Each stage contributes its gate layers and,
    /// if it has Bell measurements, one layer of Bell rotations.
    pub fn flatten(&self, guess: &BitString) -> Result<NonadaptiveCircuit> {
        let prior = self.split_intermediate(guess)?;
        let mut layers = self.prep.layers().to_vec();
        for (s, stage) in self.stages.iter().enumerate() {
            let c = self.stage_circuit(s, &prior[..s])?;
            layers.extend(c.layers().iter().cloned());
            let rot: Layer = stage.measure.iter().filter_map(Measurement::rotation).collect();
            if !rot.is_empty() {
                layers.push(rot);
            }
        }
        let last = self.stages.len() - 1;
        let guess_qubits: Vec<usize> = self.stages[..last].iter().flat_map(Stage::qubits).collect();
        let outputs = self.stages[last].qubits();
        let mut measured = guess_qubits.clone();
        measured.extend(&outputs);
        let base = Circuit::new(self.width, layers, measured)?;
        NonadaptiveCircuit::new(base, guess.clone(), guess_qubits, outputs)
    }

    /// All intermediate outcome strings of the given total length, in
    /// lexicographic order.
    pub fn all_intermediate_outcomes(&self) -> impl Iterator<Item = BitString> + '_ {
        let k = self.intermediate_bits();
        (0..1usize << k).map(move |i| BitString::from_index(i, k))
    }

    pub fn to_json(&self) -> Result<Value> {
        let rounds = self
            .stages
            .iter()
            .enumerate()
            .map(|(s, st)| {
                let rule = st.rule.to_json().ok_or_else(|| Error::Rule {
                    stage: s,
                    rule: st.rule.name().to_string(),
                    message: "rule has no JSON form".into(),
                })?;
                Ok(json!({ "rule": rule, "measure": st.measure }))
            })
            .collect::<Result<Vec<Value>>>()?;
        Ok(json!({
            "width": self.width,
            "input": self.input,
            "prep": layers_to_json(self.prep.layers()),
            "rounds": rounds,
        }))
    }

    pub fn from_json(value: &Value, registry: &RuleRegistry) -> Result<Self> {
        let width = field(value, "width")?
            .as_u64()
            .ok_or_else(|| Error::Format("`width` must be an integer".into()))? as usize;
        let input = value.get("input").and_then(Value::as_str).unwrap_or("").to_string();
        let prep = match value.get("prep") {
            Some(v) => layers_from_json(v)?,
            None => Vec::new(),
        };
        let rounds = field(value, "rounds")?
            .as_array()
            .ok_or_else(|| Error::Format("`rounds` must be an array".into()))?;
        let stages = rounds
            .iter()
            .map(|r| {
                let rule = registry.parse(field(r, "rule")?, width)?;
                let measure: Vec<Measurement> = serde_json::from_value(field(r, "measure")?.clone())?;
                Ok(Stage::new(rule, measure))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, input, prep, stages)
    }
}

/// Outcomes of one run. `intermediate` holds one string per intermediate
/// stage for adaptive runs, and the single deferred string `y` for
/// nonadaptive runs (empty when there are no guessed bits).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub intermediate: Vec<BitString>,
    #[serde(rename = "final")]
    pub final_bits: BitString,
    /// `y == g`, for nonadaptive runs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess_hit: Option<bool>,
}

/// Executes the stages in order, sampling each measurement and choosing the
/// next stage's circuit from the outcomes so far.
pub fn run_adaptive<R: Rng + ?Sized>(ac: &AdaptiveCircuit, rng: &mut R) -> Result<RunTranscript> {
    let mut state = ac.prep.run()?;
    let mut outcomes: Vec<BitString> = Vec::new();
    for (s, stage) in ac.stages.iter().enumerate() {
        let c = ac.stage_circuit(s, &outcomes)?;
        c.apply_to(&mut state)?;
        let mut bits = BitString::new();
        for m in &stage.measure {
            bits.extend_from(&m.perform(&mut state, rng)?);
        }
        outcomes.push(bits);
    }
    let final_bits = outcomes.pop().expect("at least one stage");
    Ok(RunTranscript {
        intermediate: outcomes,
        final_bits,
        guess_hit: None,
    })
}

/// One branch of the outcome tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomePath {
    /// Intermediate outcomes, one string per stage before the last.
    pub outcomes: Vec<BitString>,
    pub probability: f64,
    /// Distribution of the final stage's bits given this path.
    pub final_distribution: Vec<f64>,
}

/// Exhaustively enumerates every intermediate outcome path with nonzero
/// probability, by projection on the state vector.
pub fn enumerate_outcome_tree(ac: &AdaptiveCircuit, cap: usize) -> Result<Vec<OutcomePath>> {
    let bits = ac.intermediate_bits();
    if bits > cap {
        return Err(Error::EnumerationCap { bits, cap });
    }
    let mut paths = Vec::new();
    let state = ac.prep.run()?;
    walk(ac, 0, state, 1.0, &mut Vec::new(), &mut paths)?;
    Ok(paths)
}

fn walk(
    ac: &AdaptiveCircuit,
    s: usize,
    mut state: StateVector,
    probability: f64,
    prefix: &mut Vec<BitString>,
    out: &mut Vec<OutcomePath>,
) -> Result<()> {
    let stage = &ac.stages[s];
    ac.stage_circuit(s, prefix)?.apply_to(&mut state)?;
    for m in &stage.measure {
        if let Some(rot) = m.rotation() {
            state.apply_gate(&rot.gate, &rot.targets)?;
        }
    }
    let qubits = stage.qubits();
    if s + 1 == ac.stages.len() {
        out.push(OutcomePath {
            outcomes: prefix.clone(),
            probability,
            final_distribution: state.outcome_distribution(&qubits)?,
        });
        return Ok(());
    }
    for idx in 0..1usize << qubits.len() {
        let bits = BitString::from_index(idx, qubits.len());
        if let Some((p, post)) = state.project(&qubits, &bits)? {
            prefix.push(bits);
            walk(ac, s + 1, post, probability * p, prefix, out)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// Largest entrywise difference between final distributions of any two
/// outcome paths: zero exactly when the final output is independent of the
/// intermediate outcomes.
pub fn fix_property_deviation(paths: &[OutcomePath]) -> f64 {
    let Some(first) = paths.first() else {
        return 0.0;
    };
    paths
        .iter()
        .flat_map(|p| {
            p.final_distribution
                .iter()
                .zip(&first.final_distribution)
                .map(|(a, b)| (a - b).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::max_abs_diff;
    use crate::rng::seeded;

    fn h(q: usize) -> PlacedGate {
        PlacedGate::new(Gate::h(), vec![q])
    }

    /// Stage 1: H on q0, measure q0. Stage 2: X on q1 iff b1 = 1, measure q1.
    fn x_iff_b1() -> AdaptiveCircuit {
        let s1 = FixedRule::layers(2, vec![vec![h(0)]]).unwrap();
        let s2 = ControlledPauliRule::new(
            Circuit::empty(2, vec![]).unwrap(),
            vec![ControlledPauli {
                bit: 0,
                pauli: PauliName::X,
                target: 1,
            }],
            1,
        )
        .unwrap();
        AdaptiveCircuit::new(
            2,
            "x-iff-b1",
            vec![],
            vec![
                Stage::new(Arc::new(s1), vec![Measurement::Standard(0)]),
                Stage::new(Arc::new(s2), vec![Measurement::Standard(1)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_stage_matches_plain_circuit() {
        let c = Circuit::new(2, vec![vec![h(0)], vec![PlacedGate::new(Gate::cnot(), vec![0, 1])]], vec![0, 1]).unwrap();
        let ac = AdaptiveCircuit::new(
            2,
            "",
            vec![],
            vec![Stage::new(
                Arc::new(FixedRule::new(c.with_measured(vec![]).unwrap())),
                vec![Measurement::Standard(0), Measurement::Standard(1)],
            )],
        )
        .unwrap();
        let paths = enumerate_outcome_tree(&ac, 20).unwrap();
        assert_eq!(paths.len(), 1);
        assert!((paths[0].probability - 1.0).abs() < 1e-15);
        assert!(max_abs_diff(&paths[0].final_distribution, &c.output_distribution().unwrap()) < 1e-12);
        let mut rng = seeded(2);
        for _ in 0..20 {
            let t = run_adaptive(&ac, &mut rng).unwrap();
            assert!(t.intermediate.is_empty());
            let s = t.final_bits.to_string();
            assert!(s == "00" || s == "11");
        }
    }

    #[test]
    fn x_iff_b1_branches() {
        let ac = x_iff_b1();
        let paths = enumerate_outcome_tree(&ac, 20).unwrap();
        assert_eq!(paths.len(), 2);
        for p in &paths {
            assert!((p.probability - 0.5).abs() < 1e-12);
            let b1 = p.outcomes[0].get(0) as usize;
            assert!((p.final_distribution[b1] - 1.0).abs() < 1e-12);
        }
        // sampled runs always satisfy final == b1
        let mut rng = seeded(3);
        for _ in 0..32 {
            let t = run_adaptive(&ac, &mut rng).unwrap();
            assert_eq!(t.intermediate[0], t.final_bits);
        }
    }

    #[test]
    fn deterministic_circuit_has_one_path() {
        let s1 = FixedRule::layers(2, vec![vec![PlacedGate::new(Gate::x(), vec![0])]]).unwrap();
        let s2 = FixedRule::layers(2, vec![]).unwrap();
        let ac = AdaptiveCircuit::new(
            2,
            "",
            vec![],
            vec![
                Stage::new(Arc::new(s1), vec![Measurement::Standard(0)]),
                Stage::new(Arc::new(s2), vec![Measurement::Standard(1)]),
            ],
        )
        .unwrap();
        let paths = enumerate_outcome_tree(&ac, 20).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].outcomes[0].to_string(), "1");
        assert!((paths[0].probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn structural_validation() {
        let s = || Arc::new(FixedRule::layers(2, vec![]).unwrap()) as Arc<dyn ContinuationRule>;
        // measuring the same qubit twice
        let err = AdaptiveCircuit::new(
            2,
            "",
            vec![],
            vec![
                Stage::new(s(), vec![Measurement::Standard(0)]),
                Stage::new(s(), vec![Measurement::Standard(0)]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::ConsumedQubit { stage: 1, qubit: 0 }));
        // touching a consumed qubit
        let s2 = FixedRule::layers(2, vec![vec![h(0)]]).unwrap();
        let ac = AdaptiveCircuit::new(
            2,
            "",
            vec![],
            vec![
                Stage::new(s(), vec![Measurement::Standard(0)]),
                Stage::new(Arc::new(s2), vec![Measurement::Standard(1)]),
            ],
        )
        .unwrap();
        assert!(matches!(
            run_adaptive(&ac, &mut seeded(0)),
            Err(Error::ConsumedQubit { stage: 1, qubit: 0 })
        ));
        // arity mismatch
        let bad = ControlledPauliRule::new(Circuit::empty(2, vec![]).unwrap(), vec![], 3).unwrap();
        assert!(matches!(
            AdaptiveCircuit::new(
                2,
                "",
                vec![],
                vec![
                    Stage::new(s(), vec![Measurement::Standard(0)]),
                    Stage::new(Arc::new(bad), vec![Measurement::Standard(1)]),
                ],
            ),
            Err(Error::Rule { .. })
        ));
    }

    #[test]
    fn failing_rule_is_reported() {
        let rule = FnRule::new("broken", Some(1), |_prior: &[BitString]| {
            Err(Error::InvalidParameter("no circuit for this outcome".into()))
        });
        let ac = AdaptiveCircuit::new(
            2,
            "",
            vec![],
            vec![
                Stage::new(Arc::new(FixedRule::layers(2, vec![]).unwrap()), vec![Measurement::Standard(0)]),
                Stage::new(Arc::new(rule), vec![Measurement::Standard(1)]),
            ],
        )
        .unwrap();
        assert!(matches!(enumerate_outcome_tree(&ac, 20), Err(Error::Rule { stage: 1, .. })));
    }

    #[test]
    fn enumeration_cap() {
        let ac = x_iff_b1();
        assert!(matches!(
            enumerate_outcome_tree(&ac, 0),
            Err(Error::EnumerationCap { bits: 1, cap: 0 })
        ));
    }

    #[test]
    fn json_roundtrip_preserves_behavior() {
        let ac = x_iff_b1();
        let v = ac.to_json().unwrap();
        let back = AdaptiveCircuit::from_json(&v, &RuleRegistry::default()).unwrap();
        let a = enumerate_outcome_tree(&ac, 20).unwrap();
        let b = enumerate_outcome_tree(&back, 20).unwrap();
        assert_eq!(a, b);
        let bad = json!({"width": 2, "rounds": [{"rule": {"name": "nope"}, "measure": []}]});
        assert!(AdaptiveCircuit::from_json(&bad, &RuleRegistry::default()).is_err());
    }
}
