use super::{Assignment, DensityOracle, MeasurementPartition};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::statevector::{check_qubits, StateVector};
use crate::tolerances;

/// Exact oracle backed by the full state vector of the circuit.
#[derive(Clone, Debug)]
pub struct BruteForceOracle {
    partition: MeasurementPartition,
    state: StateVector,
}

impl BruteForceOracle {
    pub fn new(circuit: &Circuit, partition: MeasurementPartition) -> Result<Self> {
        Self::from_state(circuit.run()?, partition)
    }

    pub fn from_state(state: StateVector, partition: MeasurementPartition) -> Result<Self> {
        check_qubits(&partition.qubits(), state.width())?;
        Ok(Self { partition, state })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

impl DensityOracle for BruteForceOracle {
    fn partition(&self) -> &MeasurementPartition {
        &self.partition
    }

    fn cond_prob(&self, i: usize, fixed: &Assignment) -> Result<Vec<f64>> {
        self.partition.check_query(i, fixed)?;
        let (fq, fb) = self.partition.fixed_bits(fixed);
        let post = match self.state.project(&fq, &fb)? {
            Some((_, post)) => post,
            None => {
                return Err(Error::ZeroProbability {
                    context: format!("qubits {fq:?} fixed to {fb}"),
                })
            }
        };
        let dist = post.outcome_distribution(self.partition.group(i))?;
        let total: f64 = dist.iter().sum();
        if total <= tolerances::ZERO_PROBABILITY {
            return Err(Error::ZeroProbability {
                context: format!("group {i} given {fb}"),
            });
        }
        Ok(dist.into_iter().map(|p| p / total).collect())
    }
}

/// Factory producing [`BruteForceOracle`]s, for the staged samplers.
pub fn brute_force_factory(circuit: &Circuit, partition: &MeasurementPartition) -> Result<Box<dyn DensityOracle>> {
    Ok(Box::new(BruteForceOracle::new(circuit, partition.clone())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::PlacedGate;
    use crate::density::{chain_joint, sample_via_density};
    use crate::gate::Gate;
    use crate::metrics::{chi_square, max_abs_diff};
    use crate::random::random_circuit;
    use crate::rng::seeded;

    fn bell() -> Circuit {
        Circuit::new(
            2,
            vec![vec![PlacedGate::new(Gate::h(), vec![0])], vec![PlacedGate::new(Gate::cnot(), vec![0, 1])]],
            vec![0, 1],
        )
        .unwrap()
    }

    #[test]
    fn unconditioned_zero_state_is_point_mass() {
        let c = Circuit::empty(3, vec![0, 1, 2]).unwrap();
        let o = BruteForceOracle::new(&c, MeasurementPartition::new(vec![vec![0, 1], vec![2]]).unwrap()).unwrap();
        assert_eq!(o.cond_prob(0, &Assignment::new()).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bell_pair_correlation() {
        let o = BruteForceOracle::new(&bell(), MeasurementPartition::singletons(&[0, 1]).unwrap()).unwrap();
        let d = o.cond_prob(0, &Assignment::from([(1, 1)])).unwrap();
        assert!((d[1] - 1.0).abs() < 1e-14);
        assert!(matches!(
            o.cond_prob(0, &Assignment::from([(0, 1)])),
            Err(Error::Partition(_))
        ));
    }

    #[test]
    fn impossible_condition_is_an_error() {
        let c = Circuit::empty(2, vec![0, 1]).unwrap();
        let o = BruteForceOracle::new(&c, MeasurementPartition::singletons(&[0, 1]).unwrap()).unwrap();
        assert!(matches!(
            o.cond_prob(0, &Assignment::from([(1, 1)])),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn chain_rule_reproduces_joint_in_any_order() {
        let mut rng = seeded(21);
        let c = random_circuit(6, 3, &mut rng).unwrap();
        let groups = vec![vec![4, 0], vec![2], vec![5, 1], vec![3]];
        let part = MeasurementPartition::new(groups.clone()).unwrap();
        let o = BruteForceOracle::new(&c, part.clone()).unwrap();
        let exact = c.with_measured(part.qubits()).unwrap().output_distribution().unwrap();
        for order in [vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![2, 0, 3, 1]] {
            let joint = chain_joint(&o, &order, &Assignment::new()).unwrap();
            // reorder the exact joint into this group order
            let qubits: Vec<usize> = order.iter().flat_map(|&i| groups[i].clone()).collect();
            let want = c.with_measured(qubits).unwrap().output_distribution().unwrap();
            assert!(max_abs_diff(&joint, &want) < 1e-10);
        }
        assert!(max_abs_diff(&chain_joint(&o, &[0, 1, 2, 3], &Assignment::new()).unwrap(), &exact) < 1e-10);
    }

    #[test]
    fn sampler_matches_exact_joint() {
        let mut rng = seeded(22);
        let c = random_circuit(4, 3, &mut rng).unwrap();
        let part = MeasurementPartition::new(vec![vec![0, 1], vec![2], vec![3]]).unwrap();
        let o = BruteForceOracle::new(&c, part).unwrap();
        let exact = c.output_distribution().unwrap();
        let mut counts = vec![0u64; 16];
        let n = 10_000;
        for _ in 0..n {
            let s = sample_via_density(&o, &mut rng).unwrap();
            assert!(s.evaluations <= 3 * 4);
            counts[s.bits.to_index()] += 1;
        }
        // 15 degrees of freedom, alpha = 0.001
        assert!(chi_square(&counts, &exact) < 37.70);
    }
}
