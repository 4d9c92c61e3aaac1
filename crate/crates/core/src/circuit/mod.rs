//! Layered circuits, adaptive composition and nonadaptive flattening.
//!
//! A [`Circuit`] is a list of gate layers followed by one standard-basis
//! measurement step, so its depth is `layers + 1`. Gates inside a layer act
//! on disjoint qubits and the layer assignment is explicit: nothing here
//! repacks gates into fewer layers behind the caller's back.

mod adaptive;
mod json;
mod nonadaptive;

pub use adaptive::{
    enumerate_outcome_tree, fix_property_deviation, run_adaptive, AdaptiveCircuit,
    ContinuationRule, ControlledPauli, ControlledPauliRule, FixedRule, FnRule, Measurement,
    OutcomePath, PauliName, RuleRegistry, RunTranscript, Stage, DEFAULT_ENUMERATION_CAP,
};
pub use json::{CircuitJson, GateJson};
pub use nonadaptive::{run_nonadaptive, NonadaptiveCircuit, PostSelection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::statevector::{check_qubits, StateVector};

#[derive(Clone, Debug, PartialEq)]
pub struct PlacedGate {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl PlacedGate {
    pub fn new(gate: Gate, targets: Vec<usize>) -> Self {
        Self { gate, targets }
    }
}

pub type Layer = Vec<PlacedGate>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub struct Circuit {
    width: usize,
    layers: Vec<Layer>,
    measured: Vec<usize>,
}

impl Circuit {
    /// Validates arity, ranges, per-layer disjointness and the measured list.
    pub fn new(width: usize, layers: Vec<Layer>, measured: Vec<usize>) -> Result<Self> {
        if width == 0 {
            return Err(Error::WidthOutOfRange {
                width,
                max: usize::MAX,
            });
        }
        for (li, layer) in layers.iter().enumerate() {
            let mut used = vec![false; width];
            for pg in layer {
                if pg.targets.len() != pg.gate.arity() {
                    return Err(Error::ArityMismatch {
                        expected: pg.gate.arity(),
                        found: pg.targets.len(),
                    });
                }
                check_qubits(&pg.targets, width)?;
                for &q in &pg.targets {
                    if used[q] {
                        return Err(Error::OverlappingGates { layer: li, qubit: q });
                    }
                    used[q] = true;
                }
            }
        }
        check_qubits(&measured, width)?;
        Ok(Self {
            width,
            layers,
            measured,
        })
    }

    /// A circuit with no gates.
    pub fn empty(width: usize, measured: Vec<usize>) -> Result<Self> {
        Self::new(width, Vec::new(), measured)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    /// Gate layers plus the final measurement step.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn gates(&self) -> impl Iterator<Item = (usize, &PlacedGate)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |g| (i, g)))
    }

    /// Qubits not measured at the final step, ascending.
    pub fn unmeasured(&self) -> Vec<usize> {
        (0..self.width)
            .filter(|q| !self.measured.contains(q))
            .collect()
    }

    pub fn with_measured(&self, measured: Vec<usize>) -> Result<Self> {
        Self::new(self.width, self.layers.clone(), measured)
    }

    pub fn into_parts(self) -> (usize, Vec<Layer>, Vec<usize>) {
        (self.width, self.layers, self.measured)
    }

    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        if state.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: state.width(),
            });
        }
        for layer in &self.layers {
            for pg in layer {
                state.apply_gate(&pg.gate, &pg.targets)?;
            }
        }
        Ok(())
    }

    /// Final state from `|0...0>`, before the measurement step.
    pub fn run(&self) -> Result<StateVector> {
        let mut state = StateVector::zero_state(self.width)?;
        self.apply_to(&mut state)?;
        Ok(state)
    }

    /// Exact distribution of the measured bits, in `measured` order.
    pub fn output_distribution(&self) -> Result<Vec<f64>> {
        self.run()?.outcome_distribution(&self.measured)
    }
}

/// Feeds the unmeasured register of `first` into `second`.
///
/// `second` has width `first.width() - first.measured().len()`; its qubit
/// `j` is the `j`-th unmeasured qubit of `first` (ascending). The result
/// keeps `first`'s indices and measures `first`'s outputs followed by
/// `second`'s. Measurements of `first` are deferred past `second`'s gates,
/// which never touch them. When the last layer of `first` and the first
/// layer of `second` act on disjoint qubits they share a time step.
pub fn compose(first: &Circuit, second: &Circuit) -> Result<Circuit> {
    let free = first.unmeasured();
    if second.width() != free.len() {
        return Err(Error::WidthMismatch {
            expected: free.len(),
            found: second.width(),
        });
    }
    let remap = |layer: &Layer| -> Layer {
        layer
            .iter()
            .map(|pg| PlacedGate::new(pg.gate.clone(), pg.targets.iter().map(|&q| free[q]).collect()))
            .collect()
    };
    let mut layers = first.layers.clone();
    let mut rest = second.layers.iter().map(remap).peekable();
    if let (Some(last), Some(next)) = (layers.last_mut(), rest.peek()) {
        let busy: Vec<usize> = last.iter().flat_map(|g| g.targets.iter().copied()).collect();
        if next.iter().all(|g| g.targets.iter().all(|q| !busy.contains(q))) {
            last.extend(rest.next().unwrap());
        }
    }
    layers.extend(rest);
    let mut measured = first.measured.clone();
    measured.extend(second.measured.iter().map(|&q| free[q]));
    Circuit::new(first.width, layers, measured)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::max_abs_diff;
    use crate::random::random_circuit;
    use crate::rng::seeded;

    fn h(q: usize) -> PlacedGate {
        PlacedGate::new(Gate::h(), vec![q])
    }

    #[test]
    fn depth_counts_measurement_step() {
        let c = Circuit::new(2, vec![vec![h(0)], vec![h(1)], vec![h(0)]], vec![0, 1]).unwrap();
        assert_eq!(c.depth(), 4);
        assert_eq!(Circuit::empty(3, vec![0]).unwrap().depth(), 1);
    }

    #[test]
    fn rejects_overlapping_layer() {
        let err = Circuit::new(
            2,
            vec![vec![h(0), PlacedGate::new(Gate::cnot(), vec![0, 1])]],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingGates { layer: 0, qubit: 0 }));
        assert!(Circuit::new(2, vec![], vec![1, 1]).is_err());
        assert!(Circuit::new(2, vec![vec![h(2)]], vec![]).is_err());
    }

    #[test]
    fn compose_depth_bound() {
        // depth 2 then depth 3 on the remaining qubits
        let a = Circuit::new(3, vec![vec![h(0)]], vec![0]).unwrap();
        let b = Circuit::new(
            2,
            vec![vec![PlacedGate::new(Gate::cnot(), vec![0, 1])], vec![h(1)]],
            vec![0, 1],
        )
        .unwrap();
        let c = compose(&a, &b).unwrap();
        assert!(c.depth() <= a.depth() + b.depth());
        // first's last layer touches qubit 0, second's first layer qubits 1,2
        assert!(c.depth() < a.depth() + b.depth() - 1);
        assert_eq!(c.measured(), &[0, 1, 2]);
    }

    #[test]
    fn compose_with_empty_keeps_distribution() {
        let mut rng = seeded(11);
        let c = random_circuit(4, 3, &mut rng).unwrap().with_measured(vec![0, 2]).unwrap();
        let e = Circuit::empty(2, vec![]).unwrap();
        let d = compose(&c, &e).unwrap();
        assert!(max_abs_diff(&c.output_distribution().unwrap(), &d.output_distribution().unwrap()) < 1e-12);
        assert!(matches!(
            compose(&c, &Circuit::empty(3, vec![]).unwrap()),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = seeded(12);
        for _ in 0..5 {
            let a = random_circuit(5, 2, &mut rng).unwrap().with_measured(vec![1]).unwrap();
            let b = random_circuit(4, 2, &mut rng).unwrap().with_measured(vec![0, 3]).unwrap();
            let c = random_circuit(2, 1, &mut rng).unwrap();
            let left = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            let right = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            assert_eq!(left.measured(), right.measured());
            let dl = left.output_distribution().unwrap();
            let dr = right.output_distribution().unwrap();
            assert!(max_abs_diff(&dl, &dr) < 1e-12);
        }
    }
}
