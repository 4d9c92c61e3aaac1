//! Random gates, states and circuits used as test fixtures and by the CLI
//! self-test.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Circuit, Layer, PlacedGate};
use crate::error::Result;
use crate::gate::Gate;
use crate::statevector::StateVector;

pub fn random_one_qubit<R: Rng + ?Sized>(rng: &mut R) -> Gate {
    Gate::u3(
        rng.gen_range(0.0..PI),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.0..2.0 * PI),
    )
}

/// A generic two-qubit unitary: local layers around an entangling CNOT.
pub fn random_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> Gate {
    let a = random_one_qubit(rng).tensor(&random_one_qubit(rng));
    let b = random_one_qubit(rng).tensor(&random_one_qubit(rng));
    let c = random_one_qubit(rng).tensor(&random_one_qubit(rng));
    c.compose(&Gate::cnot())
        .compose(&b)
        .compose(&Gate::cz())
        .compose(&a)
        .with_label("U4")
}

/// Haar-ish random pure state (normalized complex Gaussian vector).
pub fn random_state<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Result<StateVector> {
    let amps = (0..1usize << width)
        .map(|_| C64::new(gaussian(rng), gaussian(rng)))
        .collect();
    StateVector::from_unnormalized(amps)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Random source circuit over `{CNOT, one-qubit gates}` with exactly
/// `cnots` CNOTs interleaved with one-qubit layers. All qubits are measured.
pub fn random_source_circuit<R: Rng + ?Sized>(
    width: usize,
    cnots: usize,
    rng: &mut R,
) -> Result<Circuit> {
    assert!(width >= 2 || cnots == 0);
    let mut layers: Vec<Layer> = Vec::new();
    let one_qubit_layer = |rng: &mut R| -> Layer {
        let mut layer = Vec::new();
        for q in 0..width {
            if rng.gen_bool(0.6) {
                layer.push(PlacedGate::new(random_one_qubit(rng), vec![q]));
            }
        }
        layer
    };
    layers.push(one_qubit_layer(rng));
    for _ in 0..cnots {
        let mut qs: Vec<usize> = (0..width).collect();
        qs.shuffle(rng);
        let mut layer = vec![PlacedGate::new(Gate::cnot(), vec![qs[0], qs[1]])];
        for &q in &qs[2..] {
            if rng.gen_bool(0.5) {
                layer.push(PlacedGate::new(random_one_qubit(rng), vec![q]));
            }
        }
        layers.push(layer);
        layers.push(one_qubit_layer(rng));
    }
    layers.retain(|l| !l.is_empty());
    Circuit::new(width, layers, (0..width).collect())
}

/// Random depth-3 circuit: a layer of arbitrary gates on |0...0>, a layer of
/// arbitrary gates, and a final measurement of every qubit. Two-qubit gates
/// are placed with probability `pair_fraction`.
pub fn random_depth3_circuit<R: Rng + ?Sized>(
    width: usize,
    pair_fraction: f64,
    rng: &mut R,
) -> Result<Circuit> {
    let layer = |rng: &mut R| -> Layer {
        let mut qs: Vec<usize> = (0..width).collect();
        qs.shuffle(rng);
        let mut out = Vec::new();
        let mut i = 0;
        while i < qs.len() {
            if i + 1 < qs.len() && rng.gen_bool(pair_fraction) {
                out.push(PlacedGate::new(random_two_qubit(rng), vec![qs[i], qs[i + 1]]));
                i += 2;
            } else {
                if rng.gen_bool(0.8) {
                    out.push(PlacedGate::new(random_one_qubit(rng), vec![qs[i]]));
                }
                i += 1;
            }
        }
        out
    };
    let first = layer(rng);
    let second = layer(rng);
    Circuit::new(width, vec![first, second], (0..width).collect())
}

/// Random circuit of the given number of gate layers, mixing one- and
/// two-qubit gates.
pub fn random_circuit<R: Rng + ?Sized>(
    width: usize,
    gate_layers: usize,
    rng: &mut R,
) -> Result<Circuit> {
    let mut layers = Vec::new();
    for _ in 0..gate_layers {
        let mut qs: Vec<usize> = (0..width).collect();
        qs.shuffle(rng);
        let mut layer = Vec::new();
        let mut i = 0;
        while i < qs.len() {
            if i + 1 < qs.len() && rng.gen_bool(0.5) {
                layer.push(PlacedGate::new(random_two_qubit(rng), vec![qs[i], qs[i + 1]]));
                i += 2;
            } else {
                layer.push(PlacedGate::new(random_one_qubit(rng), vec![qs[i]]));
                i += 1;
            }
        }
        layers.push(layer);
    }
    Circuit::new(width, layers, (0..width).collect())
}
