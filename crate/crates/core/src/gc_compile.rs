//! Teleported-CNOT compilation.
//!
//! Every CNOT of a source circuit is replaced by a gadget that consumes a
//! fresh four-qubit resource state: two Phi+ pairs on ancillas labelled
//! `1, 2` and `3, 4`, joined by one CNOT between ancillas `2` and `3`. The
//! control is Bell-measured against one end of the resource and the target
//! against the other; the two middle ancillas carry the data onward after a
//! Pauli correction chosen from the outcomes.
//!
//! The figure that fixes the wiring is not part of the written description,
//! so [`search_wiring`] tries every candidate and keeps the first one whose
//! correction table exists. The result is frozen in [`WIRING`]; a unit test
//! reruns the search and checks that it still agrees.
//!
//! Register layout for a source of width `w` with `m` CNOTs: data qubits
//! `0..w`, then gadget `j` owns ancillas `w + 4j .. w + 4j + 4` (labels 1 to
//! 4 in that order).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bits::BitString;
use crate::circuit::{
    AdaptiveCircuit, Circuit, ContinuationRule, FixedRule, FnRule, Layer, Measurement, NonadaptiveCircuit, PlacedGate,
    Stage,
};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::statevector::StateVector;
use crate::tolerances;

/// Number of guess bits contributed by one gadget (two Bell measurements).
pub const BITS_PER_GADGET: usize = 4;

/// A one-qubit correction from the Pauli class `{I, X, Z, XZ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Z,
    XZ,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ];

    pub fn gate(self) -> Gate {
        match self {
            Pauli::I => Gate::identity(),
            Pauli::X => Gate::x(),
            Pauli::Z => Gate::z(),
            Pauli::XZ => Gate::by_name("XZ").expect("built-in"),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// How a gadget is wired to its resource state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wiring {
    /// Ancilla label (1 or 4) Bell-paired with the control; the target is
    /// paired with the other end.
    pub control_partner: u8,
    /// Ancilla label (2 or 3) acting as control of the resource CNOT.
    pub offline_control: u8,
}

/// The wiring selected by [`search_wiring`].
pub const WIRING: Wiring = Wiring {
    control_partner: 1,
    offline_control: 2,
};

impl Wiring {
    /// Candidates in search order.
    pub const CANDIDATES: [Wiring; 4] = [
        Wiring {
            control_partner: 1,
            offline_control: 2,
        },
        Wiring {
            control_partner: 1,
            offline_control: 3,
        },
        Wiring {
            control_partner: 4,
            offline_control: 2,
        },
        Wiring {
            control_partner: 4,
            offline_control: 3,
        },
    ];

    pub fn target_partner(&self) -> u8 {
        5 - self.control_partner
    }

    /// Label of the ancilla that carries the control onward.
    pub fn control_carrier(&self) -> u8 {
        partner(self.control_partner)
    }

    pub fn target_carrier(&self) -> u8 {
        partner(self.target_partner())
    }

    /// The resource CNOT as a gate on targets `[ancilla 2, ancilla 3]`.
    fn offline_gate(&self) -> Gate {
        if self.offline_control == 2 {
            Gate::cnot()
        } else {
            reversed(&Gate::cnot())
        }
    }
}

fn partner(label: u8) -> u8 {
    match label {
        1 => 2,
        2 => 1,
        3 => 4,
        _ => 3,
    }
}

/// The two-qubit gate with its targets swapped.
fn reversed(g: &Gate) -> Gate {
    Gate::swap().compose(g).compose(&Gate::swap())
}

/// Resource-state preparation on four qubits (qubit `i` is label `i + 1`):
/// H on 1 and 3, CNOTs 1->2 and 3->4, then the resource CNOT.
pub fn prepare_psi_c(wiring: Wiring) -> Circuit {
    let (c, t) = if wiring.offline_control == 2 { (1, 2) } else { (2, 1) };
    Circuit::new(
        4,
        vec![
            vec![PlacedGate::new(Gate::h(), vec![0]), PlacedGate::new(Gate::h(), vec![2])],
            vec![
                PlacedGate::new(Gate::cnot(), vec![0, 1]),
                PlacedGate::new(Gate::cnot(), vec![2, 3]),
            ],
            vec![PlacedGate::new(Gate::cnot(), vec![c, t])],
        ],
        Vec::new(),
    )
    .expect("static resource circuit")
}

pub fn psi_c_state(wiring: Wiring) -> StateVector {
    prepare_psi_c(wiring).run().expect("four qubits")
}

/// Corrections indexed by the gadget's 4-bit outcome `b1 b2`, where `b1`
/// is the Bell outcome on the control and `b2` on the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionTable {
    entries: Vec<(Pauli, Pauli)>,
}

impl CorrectionTable {
    pub fn get(&self, outcome: &BitString) -> (Pauli, Pauli) {
        self.entries[outcome.to_index()]
    }

    pub fn entries(&self) -> &[(Pauli, Pauli)] {
        &self.entries
    }

    /// The outcome needing no correction.
    pub fn identity_outcome(&self) -> BitString {
        let i = self
            .entries
            .iter()
            .position(|&e| e == (Pauli::I, Pauli::I))
            .expect("a valid table has an identity entry");
        BitString::from_index(i, BITS_PER_GADGET)
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, (u, v))| {
                (
                    BitString::from_index(i, BITS_PER_GADGET).to_string(),
                    json!([u.to_string(), v.to_string()]),
                )
            })
            .collect();
        Value::Object(map)
    }
}

/// Linear map the gadget applies to the control/target pair for a fixed
/// outcome, before correction, normalized to a unitary. Local order of the
/// result is `(control carrier, target carrier)`. `None` when the branch
/// map is not proportional to a unitary.
pub fn gadget_map(wiring: Wiring, outcome: &BitString) -> Result<Option<Gate>> {
    // qubits 0 = control, 1 = target, 2..6 = ancilla labels 1..4
    let anc = |label: u8| 1 + label as usize;
    let bell_c = [0, anc(wiring.control_partner)];
    let bell_t = [1, anc(wiring.target_partner())];
    let measured = [bell_c[0], bell_c[1], bell_t[0], bell_t[1]];
    let resource = psi_c_state(wiring);
    let mut m = vec![C64::new(0.0, 0.0); 16];
    for col in 0..4 {
        // local input index 2 * control + target
        let input = StateVector::basis_state(2, ((col >> 1) & 1) | ((col & 1) << 1))?;
        let mut s = input.tensor(&resource)?;
        s.apply_gate(&Gate::bell_rotation(), &bell_c)?;
        s.apply_gate(&Gate::bell_rotation(), &bell_t)?;
        let (p, residual) = match s.reduce_fixed(&measured, outcome) {
            Ok((p, r)) => (p, r.expect("two qubits remain")),
            Err(Error::ZeroProbability { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        // residual qubit 0 = label 2, qubit 1 = label 3
        let control_low = wiring.control_carrier() == 2;
        for r in 0..4 {
            let (c, t) = if control_low { (r & 1, r >> 1) } else { (r >> 1, r & 1) };
            m[(2 * c + t) * 4 + col] = residual.amplitude(r) * p.sqrt();
        }
    }
    let col_norm: f64 = (0..4).map(|r| m[r * 4].norm_sqr()).sum::<f64>().sqrt();
    if col_norm <= tolerances::ZERO_PROBABILITY {
        return Ok(None);
    }
    let m = m.into_iter().map(|a| a / col_norm).collect();
    Ok(Gate::new(m, Some("gadget".into())).ok())
}

/// For each of the 16 outcomes, the unique Pauli pair `(U, V)` with
/// `(U x V) G` equal to CNOT up to phase, `G` being [`gadget_map`].
pub fn derive_correction_table(wiring: Wiring) -> Result<CorrectionTable> {
    let cnot = Gate::cnot();
    let mut entries = Vec::with_capacity(16);
    for idx in 0..16 {
        let outcome = BitString::from_index(idx, BITS_PER_GADGET);
        let no_fix = || Error::NoPauliCorrection {
            outcome: outcome.to_string(),
        };
        let g = gadget_map(wiring, &outcome)?.ok_or_else(no_fix)?;
        let fits: Vec<(Pauli, Pauli)> = Pauli::ALL
            .iter()
            .flat_map(|&u| Pauli::ALL.iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| {
                u.gate()
                    .tensor(&v.gate())
                    .compose(&g)
                    .equals_up_to_phase(&cnot, tolerances::GADGET_FIDELITY)
            })
            .collect();
        match fits.as_slice() {
            [one] => entries.push(*one),
            _ => return Err(no_fix()),
        }
    }
    Ok(CorrectionTable { entries })
}

/// First candidate wiring whose correction table exists.
pub fn search_wiring() -> Result<(Wiring, CorrectionTable)> {
    for w in Wiring::CANDIDATES {
        match derive_correction_table(w) {
            Ok(t) => return Ok((w, t)),
            Err(Error::NoPauliCorrection { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoPauliCorrection {
        outcome: "every candidate wiring".into(),
    })
}

/// Fidelity between CNOT applied to `input` and the corrected output of the
/// gadget on branch `outcome`, simulated directly on six qubits.
pub fn gadget_fidelity(
    wiring: Wiring,
    table: &CorrectionTable,
    input: &StateVector,
    outcome: &BitString,
) -> Result<f64> {
    if input.width() != 2 {
        return Err(Error::WidthMismatch {
            expected: 2,
            found: input.width(),
        });
    }
    // qubit 0 = control, 1 = target as in `input`'s little-endian order
    let anc = |label: u8| 1 + label as usize;
    let mut s = input.tensor(&psi_c_state(wiring))?;
    s.apply_gate(&Gate::bell_rotation(), &[0, anc(wiring.control_partner)])?;
    s.apply_gate(&Gate::bell_rotation(), &[1, anc(wiring.target_partner())])?;
    let Some((_, mut s)) = s.project(
        &[0, anc(wiring.control_partner), 1, anc(wiring.target_partner())],
        outcome,
    )?
    else {
        return Ok(0.0);
    };
    let (u, v) = table.get(outcome);
    let (cc, tc) = (anc(wiring.control_carrier()), anc(wiring.target_carrier()));
    s.apply_gate(&u.gate(), &[cc])?;
    s.apply_gate(&v.gate(), &[tc])?;
    // move the carriers onto qubits 0 and 1 and drop the rest
    s.apply_gate(&Gate::swap(), &[0, cc])?;
    s.apply_gate(&Gate::swap(), &[1, tc])?;
    let rest: Vec<usize> = (2..6).collect();
    let mut best = 0.0f64;
    for idx in 0..16 {
        let bits = BitString::from_index(idx, 4);
        if let Ok((p, Some(out))) = s.reduce_fixed(&rest, &bits) {
            if p > 1.0 - 1e-6 {
                let mut expected = input.clone();
                expected.apply_gate(&Gate::cnot(), &[0, 1])?;
                best = best.max(crate::statevector::fidelity(&expected, &out)?);
            }
        }
    }
    Ok(best)
}

/// Where one gadget sits in the compiled register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GadgetLayout {
    /// Physical qubit carrying the control into the gadget.
    pub control_in: usize,
    pub target_in: usize,
    /// Ancillas for labels 1..4.
    pub ancillas: [usize; 4],
    /// Carriers of control and target after the gadget.
    pub control_out: usize,
    pub target_out: usize,
    /// Bell-measured pairs, control side first.
    pub bell_pairs: [(usize, usize); 2],
}

impl GadgetLayout {
    /// The four guess qubits in outcome-bit order.
    pub fn guess_qubits(&self) -> [usize; 4] {
        let [(a, b), (c, d)] = self.bell_pairs;
        [a, b, c, d]
    }
}

/// Result of compiling one source circuit.
#[derive(Clone, Debug)]
pub struct GcCompilation {
    source: Circuit,
    wiring: Wiring,
    table: CorrectionTable,
    gadgets: Vec<GadgetLayout>,
    /// Merged one-qubit gates applied to each original data qubit before it
    /// is first consumed or measured.
    data_gates: Vec<Option<Gate>>,
    /// Merged one-qubit gates applied after each gadget's correction on its
    /// control and target carriers.
    carrier_gates: Vec<[Option<Gate>; 2]>,
    outputs: Vec<usize>,
    adaptive: AdaptiveCircuit,
}

fn then(first: Option<Gate>, next: &Gate) -> Gate {
    match first {
        Some(g) => next.compose(&g),
        None => next.clone(),
    }
}

fn merged(pending: &Option<Gate>, correction: Pauli) -> Gate {
    match pending {
        Some(g) => g.compose(&correction.gate()),
        None => correction.gate(),
    }
}

/// Replaces every CNOT of `src` by a teleportation gadget, producing an
/// adaptive circuit whose stages contain one-qubit gates only.
pub fn compile_adaptive(src: &Circuit) -> Result<GcCompilation> {
    let table = derive_correction_table(WIRING)?;
    compile_with(src, WIRING, table)
}

pub fn compile_with(src: &Circuit, wiring: Wiring, table: CorrectionTable) -> Result<GcCompilation> {
    let w = src.width();
    let cnot_count = src.gates().filter(|(_, g)| g.gate.arity() == 2).count();
    let width = w + BITS_PER_GADGET * cnot_count;
    crate::statevector::check_width(width)?;

    let cnot = Gate::cnot();
    let mut carrier: Vec<usize> = (0..w).collect();
    // pending one-qubit gates per physical qubit
    let mut pending: Vec<Option<Gate>> = vec![None; width];
    let mut gadgets: Vec<GadgetLayout> = Vec::new();
    for (li, layer) in src.layers().iter().enumerate() {
        for pg in layer {
            match pg.gate.arity() {
                1 => {
                    let q = carrier[pg.targets[0]];
                    pending[q] = Some(then(pending[q].take(), &pg.gate));
                }
                _ => {
                    if !pg.gate.equals_up_to_phase(&cnot, tolerances::UNITARY) {
                        return Err(Error::UnsupportedSourceGate {
                            layer: li,
                            label: pg.gate.name().to_string(),
                        });
                    }
                    let base = w + BITS_PER_GADGET * gadgets.len();
                    let anc = |label: u8| base + label as usize - 1;
                    let (c, t) = (pg.targets[0], pg.targets[1]);
                    let g = GadgetLayout {
                        control_in: carrier[c],
                        target_in: carrier[t],
                        ancillas: [base, base + 1, base + 2, base + 3],
                        control_out: anc(wiring.control_carrier()),
                        target_out: anc(wiring.target_carrier()),
                        bell_pairs: [
                            (carrier[c], anc(wiring.control_partner)),
                            (carrier[t], anc(wiring.target_partner())),
                        ],
                    };
                    carrier[c] = g.control_out;
                    carrier[t] = g.target_out;
                    gadgets.push(g);
                }
            }
        }
    }
    let data_gates: Vec<Option<Gate>> = pending[..w].to_vec();
    let carrier_gates: Vec<[Option<Gate>; 2]> = gadgets
        .iter()
        .map(|g| [pending[g.control_out].clone(), pending[g.target_out].clone()])
        .collect();
    let outputs: Vec<usize> = src.measured().iter().map(|&q| carrier[q]).collect();

    let adaptive = build_adaptive(src, wiring, &table, &gadgets, &data_gates, &carrier_gates, &outputs, width)?;
    Ok(GcCompilation {
        source: src.clone(),
        wiring,
        table,
        gadgets,
        data_gates,
        carrier_gates,
        outputs,
        adaptive,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_adaptive(
    src: &Circuit,
    wiring: Wiring,
    table: &CorrectionTable,
    gadgets: &[GadgetLayout],
    data_gates: &[Option<Gate>],
    carrier_gates: &[[Option<Gate>; 2]],
    outputs: &[usize],
    width: usize,
) -> Result<AdaptiveCircuit> {
    // resource states for every gadget, three layers in parallel
    let psi = prepare_psi_c(wiring);
    let mut prep: Vec<Layer> = vec![Vec::new(); psi.layers().len()];
    for g in gadgets {
        for (li, layer) in psi.layers().iter().enumerate() {
            for pg in layer {
                prep[li].push(PlacedGate::new(
                    pg.gate.clone(),
                    pg.targets.iter().map(|&q| g.ancillas[q]).collect(),
                ));
            }
        }
    }
    if gadgets.is_empty() {
        prep.clear();
    }

    let data_layer: Layer = data_gates
        .iter()
        .enumerate()
        .filter_map(|(q, g)| g.clone().map(|g| PlacedGate::new(g, vec![q])))
        .collect();
    let bell = |g: &GadgetLayout| -> Vec<Measurement> {
        g.bell_pairs.iter().map(|&(a, b)| Measurement::Bell(a, b)).collect()
    };
    let correction_rule = |j: usize| -> Arc<dyn ContinuationRule> {
        let g = gadgets[j].clone();
        let gates = carrier_gates[j].clone();
        let table = table.clone();
        Arc::new(FnRule::new("gadget_correction", Some(BITS_PER_GADGET * (j + 1)), move |prior: &[BitString]| {
            let outcome = prior.last().expect("at least one prior stage");
            let (u, v) = table.get(outcome);
            let layer = vec![
                PlacedGate::new(merged(&gates[0], u), vec![g.control_out]),
                PlacedGate::new(merged(&gates[1], v), vec![g.target_out]),
            ];
            Circuit::new(width, vec![layer], Vec::new())
        }))
    };
    let standard: Vec<Measurement> = outputs.iter().map(|&q| Measurement::Standard(q)).collect();

    let first_rule: Arc<dyn ContinuationRule> = Arc::new(FixedRule::layers(
        width,
        if data_layer.is_empty() { vec![] } else { vec![data_layer] },
    )?);
    let mut stages = Vec::new();
    if gadgets.is_empty() {
        stages.push(Stage::new(first_rule, standard));
    } else {
        stages.push(Stage::new(first_rule, bell(&gadgets[0])));
        for (j, gd) in gadgets.iter().enumerate().skip(1) {
            stages.push(Stage::new(correction_rule(j - 1), bell(gd)));
        }
        stages.push(Stage::new(correction_rule(gadgets.len() - 1), standard));
    }
    let input = serde_json::to_string(src).map_err(Error::from)?;
    AdaptiveCircuit::new(width, input, prep, stages)
}

impl GcCompilation {
    pub fn source(&self) -> &Circuit {
        &self.source
    }

    pub fn adaptive(&self) -> &AdaptiveCircuit {
        &self.adaptive
    }

    pub fn wiring(&self) -> Wiring {
        self.wiring
    }

    pub fn table(&self) -> &CorrectionTable {
        &self.table
    }

    pub fn gadgets(&self) -> &[GadgetLayout] {
        &self.gadgets
    }

    pub fn gadget_count(&self) -> usize {
        self.gadgets.len()
    }

    /// Number of guess bits `k`.
    pub fn guess_len(&self) -> usize {
        BITS_PER_GADGET * self.gadgets.len()
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn width(&self) -> usize {
        self.adaptive.width()
    }

    /// The guess under which every correction is the identity, i.e. the
    /// identity outcome of the table repeated once per gadget.
    pub fn identity_guess(&self) -> BitString {
        let one = self.table.identity_outcome();
        BitString::concat(std::iter::repeat_n(&one, self.gadgets.len()))
    }

    /// The four-layer nonadaptive circuit for guess `g`.
    pub fn flatten(&self, g: &BitString) -> Result<NonadaptiveCircuit> {
        flatten_nonadaptive(self, g)
    }

    /// Record of how the flattened circuit was produced.
    pub fn provenance(&self) -> Value {
        json!({
            "gadgets": self.gadgets.len(),
            "k": self.guess_len(),
            "wiring": self.wiring,
            "correction_table": self.table.to_json(),
            "identity_guess": self.identity_guess().to_string(),
            "layout": self.gadgets,
            "source": self.source,
        })
    }
}

/// Builds the nonadaptive circuit for guess `g`:
///
/// 1. Phi+ preparation on every ancilla pair, with the data qubits' leading
///    one-qubit gates alongside;
/// 2. on each gadget's middle ancillas, the resource CNOT merged with the
///    guessed correction and the one-qubit gates that follow it;
/// 3. Bell rotations on every measured pair;
/// 4. standard-basis measurement of guess and output qubits.
///
/// Empty layers are dropped, so the depth is at most four.
pub fn flatten_nonadaptive(gc: &GcCompilation, g: &BitString) -> Result<NonadaptiveCircuit> {
    if g.len() != gc.guess_len() {
        return Err(Error::GuessLength {
            expected: gc.guess_len(),
            found: g.len(),
        });
    }
    let width = gc.width();
    let offline = gc.wiring.offline_gate();
    let mut layer1: Layer = Vec::new();
    let mut layer2: Layer = Vec::new();
    let mut layer3: Layer = Vec::new();
    for (q, gate) in gc.data_gates.iter().enumerate() {
        if let Some(gate) = gate {
            layer1.push(PlacedGate::new(gate.clone(), vec![q]));
        }
    }
    let mut guess_qubits = Vec::with_capacity(g.len());
    for (j, gd) in gc.gadgets.iter().enumerate() {
        let a = gd.ancillas;
        layer1.push(PlacedGate::new(Gate::phi_plus_prep(), vec![a[0], a[1]]));
        layer1.push(PlacedGate::new(Gate::phi_plus_prep(), vec![a[2], a[3]]));

        let (u, v) = gc.table.get(&g.slice(BITS_PER_GADGET * j, BITS_PER_GADGET * (j + 1)));
        let [cg, tg] = &gc.carrier_gates[j];
        let (after_c, after_t) = (merged(cg, u), merged(tg, v));
        // local order on [ancilla 2, ancilla 3]
        let (l2, l3) = if gc.wiring.control_carrier() == 2 {
            (after_c, after_t)
        } else {
            (after_t, after_c)
        };
        layer2.push(PlacedGate::new(
            l2.tensor(&l3).compose(&offline).with_label("GadgetCore"),
            vec![a[1], a[2]],
        ));
        for &(x, y) in &gd.bell_pairs {
            layer3.push(PlacedGate::new(Gate::bell_rotation(), vec![x, y]));
        }
        guess_qubits.extend(gd.guess_qubits());
    }
    let layers: Vec<Layer> = [layer1, layer2, layer3].into_iter().filter(|l| !l.is_empty()).collect();
    let mut measured = guess_qubits.clone();
    measured.extend(&gc.outputs);
    let base = Circuit::new(width, layers, measured)?;
    NonadaptiveCircuit::new(base, g.clone(), guess_qubits, gc.outputs.clone())
}

/// Exact `Pr[y == g]` of a flattened circuit.
pub fn guess_hit_probability(nc: &NonadaptiveCircuit) -> Result<f64> {
    nc.guess_hit_probability()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::enumerate_outcome_tree;
    use crate::metrics::total_variation;
    use crate::random::{random_source_circuit, random_state};
    use crate::rng::seeded;

    fn h(q: usize) -> PlacedGate {
        PlacedGate::new(Gate::h(), vec![q])
    }

    fn cx(c: usize, t: usize) -> PlacedGate {
        PlacedGate::new(Gate::cnot(), vec![c, t])
    }

    #[test]
    fn search_reproduces_frozen_wiring() {
        let (w, table) = search_wiring().unwrap();
        assert_eq!(w, WIRING);
        assert_eq!(table, derive_correction_table(WIRING).unwrap());
    }

    #[test]
    fn reversed_offline_cnot_has_no_pauli_correction() {
        let w = Wiring {
            control_partner: 1,
            offline_control: 3,
        };
        assert!(matches!(derive_correction_table(w), Err(Error::NoPauliCorrection { .. })));
    }

    #[test]
    fn psi_c_fixture() {
        let s = psi_c_state(WIRING);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
        // 1/2 (|0000> + |1110> + |1101> + |0011>) written label 1 first;
        // little-endian indices 0, 7, 11, 12
        for i in 0..16 {
            let want = if [0, 7, 11, 12].contains(&i) { 0.5 } else { 0.0 };
            assert!((s.amplitude(i) - C64::new(want, 0.0)).norm() < 1e-14, "{i}");
        }
    }

    #[test]
    fn first_pair_is_phi_plus_before_resource_cnot() {
        let (_, layers, _) = prepare_psi_c(WIRING).into_parts();
        let s = Circuit::new(4, layers[..2].to_vec(), vec![]).unwrap().run().unwrap();
        let d = s.outcome_distribution(&[0, 1]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-14 && (d[3] - 0.5).abs() < 1e-14);
        let mut rot = s.clone();
        rot.apply_gate(&Gate::bell_rotation(), &[0, 1]).unwrap();
        // Phi+ reports 10
        assert!((rot.probability_of(&[0, 1], &"10".parse().unwrap()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_entry_is_phi_plus_phi_plus() {
        let t = derive_correction_table(WIRING).unwrap();
        assert_eq!(t.identity_outcome().to_string(), "1010");
        assert_eq!(t.entries().iter().filter(|&&e| e == (Pauli::I, Pauli::I)).count(), 1);
        // every entry is self-inverse up to phase
        for (u, v) in t.entries() {
            for p in [u, v] {
                assert!(p.gate().compose(&p.gate()).equals_up_to_phase(&Gate::identity(), 1e-12));
            }
        }
    }

    #[test]
    fn gadget_is_exact_cnot_on_random_inputs() {
        let t = derive_correction_table(WIRING).unwrap();
        let mut rng = seeded(1);
        for _ in 0..4 {
            let input = random_state(2, &mut rng).unwrap();
            for o in 0..16 {
                let f = gadget_fidelity(WIRING, &t, &input, &BitString::from_index(o, 4)).unwrap();
                assert!(f >= 1.0 - 1e-10, "{o}: {f}");
            }
        }
    }

    #[test]
    fn single_cnot_truth_table() {
        for input in 0..4usize {
            let mut layers = vec![];
            let mut prep = vec![];
            if input & 2 != 0 {
                prep.push(PlacedGate::new(Gate::x(), vec![0]));
            }
            if input & 1 != 0 {
                prep.push(PlacedGate::new(Gate::x(), vec![1]));
            }
            if !prep.is_empty() {
                layers.push(prep);
            }
            layers.push(vec![cx(0, 1)]);
            let src = Circuit::new(2, layers, vec![0, 1]).unwrap();
            let gc = compile_adaptive(&src).unwrap();
            let paths = enumerate_outcome_tree(gc.adaptive(), 20).unwrap();
            assert_eq!(paths.len(), 16);
            let c = input >> 1;
            let t = (input & 1) ^ c;
            for p in paths {
                assert!((p.final_distribution[2 * c + t] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_cnots_keep_the_circuit() {
        let src = Circuit::new(2, vec![vec![h(0)], vec![h(1)]], vec![1, 0]).unwrap();
        let gc = compile_adaptive(&src).unwrap();
        assert_eq!(gc.gadget_count(), 0);
        assert_eq!(gc.width(), 2);
        let nc = gc.flatten(&BitString::new()).unwrap();
        assert!(nc.depth() <= 2);
        assert!((guess_hit_probability(&nc).unwrap() - 1.0).abs() < 1e-14);
        let post = nc.postselect().unwrap();
        assert!(total_variation(&post.distribution, &src.output_distribution().unwrap()) < 1e-12);
    }

    #[test]
    fn two_cnots_with_interleaved_h() {
        let src = Circuit::new(
            3,
            vec![vec![h(0)], vec![cx(0, 1), h(2)], vec![h(1)], vec![cx(1, 2)], vec![h(0), h(2)]],
            vec![0, 1, 2],
        )
        .unwrap();
        let gc = compile_adaptive(&src).unwrap();
        let want = src.output_distribution().unwrap();
        for p in enumerate_outcome_tree(gc.adaptive(), 20).unwrap() {
            assert!(total_variation(&p.final_distribution, &want) < 1e-10);
        }
        // generic flattening of the adaptive circuit agrees with the
        // four-layer construction
        let g = gc.identity_guess();
        let deep = gc.adaptive().flatten(&g).unwrap().postselect().unwrap();
        let flat = gc.flatten(&g).unwrap();
        assert!(flat.depth() <= 4);
        let post = flat.postselect().unwrap();
        assert!(total_variation(&post.distribution, &want) < 1e-9);
        assert!(total_variation(&deep.distribution, &want) < 1e-9);
        assert!((post.hit_probability - 1.0 / 256.0).abs() < 1e-10);
    }

    #[test]
    fn stages_hold_one_qubit_gates_only() {
        let mut rng = seeded(4);
        let src = random_source_circuit(3, 3, &mut rng).unwrap();
        let gc = compile_adaptive(&src).unwrap();
        let ac = gc.adaptive();
        let k = ac.intermediate_bits();
        assert_eq!(k, gc.guess_len());
        let g = BitString::from_index(5, k);
        let prior = ac.split_intermediate(&g).unwrap();
        for s in 0..ac.stages().len() {
            let c = ac.stage_circuit(s, &prior[..s]).unwrap();
            assert!(c.gates().all(|(_, pg)| pg.gate.arity() == 1));
        }
        // every resource block's ends are consumed by exactly one gadget
        for gd in gc.gadgets() {
            let q = gd.guess_qubits();
            assert!(q.contains(&gd.ancillas[0]) && q.contains(&gd.ancillas[3]));
        }
    }

    #[test]
    fn rejects_other_two_qubit_gates() {
        let src = Circuit::new(2, vec![vec![PlacedGate::new(Gate::cz(), vec![0, 1])]], vec![0, 1]).unwrap();
        assert!(matches!(
            compile_adaptive(&src),
            Err(Error::UnsupportedSourceGate { layer: 0, .. })
        ));
    }

    #[test]
    fn guess_length_is_checked() {
        let src = Circuit::new(2, vec![vec![cx(0, 1)]], vec![0, 1]).unwrap();
        let gc = compile_adaptive(&src).unwrap();
        assert!(matches!(
            gc.flatten(&"101".parse().unwrap()),
            Err(Error::GuessLength { expected: 4, found: 3 })
        ));
    }
}
