//! Seeded fixture families shared by the experiments, the self-test and the
//! acceptance suite.

use std::sync::Arc;

use cdsim::circuit::{
    AdaptiveCircuit, Circuit, ControlledPauli, ControlledPauliRule, FixedRule, Measurement, PauliName, PlacedGate,
    Stage,
};
use cdsim::gc_compile::GcCompilation;
use cdsim::random::{random_one_qubit, random_source_circuit, random_state};
use cdsim::rng::seeded;
use cdsim::{BitString, Gate, Result};
use rand::Rng;

/// `count` random sources of width 2 to 4 with 1 to `max_cnots` CNOTs,
/// cycling through the shapes so that every combination appears.
pub fn gc_sources(seed: u64, count: usize, max_cnots: usize) -> Result<Vec<Circuit>> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|i| {
            let width = 2 + i % 3;
            let cnots = 1 + (i / 3) % max_cnots;
            random_source_circuit(width, cnots, &mut rng)
        })
        .collect()
}

/// Six guesses: all zeros, the identity-correction guess, and four uniform
/// random strings (fewer when `k` leaves fewer distinct strings).
pub fn guesses(gc: &GcCompilation, seed: u64) -> Vec<BitString> {
    let k = gc.guess_len();
    let mut out = vec![BitString::zeros(k), gc.identity_guess()];
    let mut rng = seeded(seed);
    let distinct = if k >= 63 { u64::MAX } else { 1u64 << k };
    while (out.len() as u64) < distinct.min(6) {
        let g = BitString::from_bits((0..k).map(|_| rng.gen_range(0..2u8)));
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out.dedup();
    out
}

/// Source whose output bit (qubit 1) is always `value`, through one CNOT.
pub fn constant_source(value: bool) -> Circuit {
    let mut layers = Vec::new();
    if value {
        layers.push(vec![PlacedGate::new(Gate::x(), vec![0])]);
    }
    layers.push(vec![PlacedGate::new(Gate::cnot(), vec![0, 1])]);
    Circuit::new(2, layers, vec![1]).expect("fixed fixture")
}

/// `H` then CNOT: outputs `00` and `11` with probability 1/2 each.
pub fn bell_source() -> Circuit {
    Circuit::new(
        2,
        vec![
            vec![PlacedGate::new(Gate::h(), vec![0])],
            vec![PlacedGate::new(Gate::cnot(), vec![0, 1])],
        ],
        vec![0, 1],
    )
    .expect("fixed fixture")
}

/// Teleportation-shaped adaptive circuit on three qubits: a random state on
/// qubit 0, a Bell pair on 1 and 2, a Bell measurement of (0, 1), random
/// controlled Paulis on qubit 2 and a final random rotation before the
/// output measurement.
pub fn teleport_fixture(seed: u64) -> Result<AdaptiveCircuit> {
    let mut rng = seeded(seed);
    let prep = vec![
        vec![
            PlacedGate::new(random_one_qubit(&mut rng), vec![0]),
            PlacedGate::new(Gate::h(), vec![1]),
        ],
        vec![PlacedGate::new(Gate::cnot(), vec![1, 2])],
    ];
    let first = FixedRule::layers(3, vec![])?;
    let paulis = [PauliName::X, PauliName::Y, PauliName::Z];
    let controls = (0..2)
        .map(|bit| ControlledPauli {
            bit,
            pauli: paulis[rng.gen_range(0..3)],
            target: 2,
        })
        .collect();
    let base = Circuit::new(3, vec![vec![PlacedGate::new(random_one_qubit(&mut rng), vec![2])]], vec![])?;
    let second = ControlledPauliRule::new(base, controls, 2)?;
    AdaptiveCircuit::new(
        3,
        "teleport",
        prep,
        vec![
            Stage::new(Arc::new(first), vec![Measurement::Bell(0, 1)]),
            Stage::new(Arc::new(second), vec![Measurement::Standard(2)]),
        ],
    )
}

/// Random two-qubit input states for the gadget check.
pub fn gadget_inputs(seed: u64, count: usize) -> Result<Vec<cdsim::StateVector>> {
    let mut rng = seeded(seed);
    (0..count).map(|_| random_state(2, &mut rng)).collect()
}
