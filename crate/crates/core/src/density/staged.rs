//! Simulating adaptive circuits through density computations of their
//! nonadaptive prefixes.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::{chain_joint, sample_in_order, Assignment, DensityOracle, MeasurementPartition};
use crate::bits::BitString;
use crate::circuit::{
    enumerate_outcome_tree, fix_property_deviation, AdaptiveCircuit, Circuit, Layer, Measurement, OutcomePath,
    RunTranscript,
};
use crate::error::{Error, Result};
use crate::tolerances;

/// Builds an oracle for a nonadaptive circuit and the partition of its
/// measured qubits.
pub type OracleFactory<'a> = dyn Fn(&Circuit, &MeasurementPartition) -> Result<Box<dyn DensityOracle>> + 'a;

/// The nonadaptive circuit running stages `0..=s` with earlier outcomes
/// fixed to `prior`, every measurement deferred to the end, together with
/// one partition group per measurement (stage by stage).
pub fn prefix_circuit(ac: &AdaptiveCircuit, s: usize, prior: &[BitString]) -> Result<(Circuit, MeasurementPartition)> {
    let mut layers: Vec<Layer> = ac.prep().layers().to_vec();
    let mut measurements: Vec<Measurement> = Vec::new();
    for (t, stage) in ac.stages()[..=s].iter().enumerate() {
        let c = ac.stage_circuit(t, &prior[..t])?;
        layers.extend(c.layers().iter().cloned());
        let rot: Layer = stage.measure.iter().filter_map(Measurement::rotation).collect();
        if !rot.is_empty() {
            layers.push(rot);
        }
        measurements.extend(&stage.measure);
    }
    let partition = MeasurementPartition::from_measurements(&measurements)?;
    let circuit = Circuit::new(ac.width(), layers, partition.qubits())?;
    Ok((circuit, partition))
}

/// Group indices of each stage within [`prefix_circuit`]'s partition.
fn stage_groups(ac: &AdaptiveCircuit, s: usize) -> Vec<usize> {
    let start: usize = ac.stages()[..s].iter().map(|st| st.measure.len()).sum();
    (start..start + ac.stages()[s].measure.len()).collect()
}

/// Outcomes of earlier stages as a fixed assignment on the prefix
/// partition.
fn fixed_from(ac: &AdaptiveCircuit, prior: &[BitString]) -> Assignment {
    let mut fixed = Assignment::new();
    for (t, bits) in prior.iter().enumerate() {
        let mut at = 0;
        for (g, m) in stage_groups(ac, t).into_iter().zip(&ac.stages()[t].measure) {
            let n = m.bit_count();
            fixed.insert(g, bits.slice(at, at + n).to_index());
            at += n;
        }
    }
    fixed
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StagedRun {
    pub transcript: RunTranscript,
    /// Probability of the sampled intermediate outcomes and final bits.
    pub probability: f64,
    pub evaluations: usize,
}

/// Samples an adaptive circuit stage by stage: each stage's outcome is drawn
/// from the density computation of the nonadaptive prefix in which every
/// earlier outcome is fixed (guessed) to the value already drawn.
pub fn adaptive_from_nonadaptive<R: Rng + ?Sized>(
    ac: &AdaptiveCircuit,
    factory: &OracleFactory<'_>,
    rng: &mut R,
) -> Result<StagedRun> {
    let mut outcomes: Vec<BitString> = Vec::new();
    let mut probability = 1.0;
    let mut evaluations = 0;
    for s in 0..ac.stages().len() {
        let (circuit, partition) = prefix_circuit(ac, s, &outcomes)?;
        let oracle = factory(&circuit, &partition)?;
        let groups = stage_groups(ac, s);
        let fixed = fixed_from(ac, &outcomes);
        let sample = sample_in_order(&*oracle, &groups, &fixed, rng)?;
        evaluations += sample.evaluations;
        // probability of the drawn outcome, for the transcript
        let mut f = fixed.clone();
        for (&g, &o) in groups.iter().zip(&sample.outcomes) {
            probability *= oracle.cond_prob(g, &f)?[o];
            f.insert(g, o);
        }
        outcomes.push(sample.bits);
    }
    let final_bits = outcomes.pop().expect("at least one stage");
    Ok(StagedRun {
        transcript: RunTranscript {
            intermediate: outcomes,
            final_bits,
            guess_hit: None,
        },
        probability,
        evaluations,
    })
}

/// The outcome tree computed exactly through the staged oracles, in the
/// same form as [`enumerate_outcome_tree`].
pub fn staged_outcome_tree(ac: &AdaptiveCircuit, factory: &OracleFactory<'_>, cap: usize) -> Result<Vec<OutcomePath>> {
    let bits = ac.intermediate_bits();
    if bits > cap {
        return Err(Error::EnumerationCap { bits, cap });
    }
    let mut out = Vec::new();
    staged_walk(ac, factory, 0, &mut Vec::new(), 1.0, &mut out)?;
    Ok(out)
}

fn staged_walk(
    ac: &AdaptiveCircuit,
    factory: &OracleFactory<'_>,
    s: usize,
    prefix: &mut Vec<BitString>,
    probability: f64,
    out: &mut Vec<OutcomePath>,
) -> Result<()> {
    let (circuit, partition) = prefix_circuit(ac, s, prefix)?;
    let oracle = factory(&circuit, &partition)?;
    let joint = chain_joint(&*oracle, &stage_groups(ac, s), &fixed_from(ac, prefix))?;
    if s + 1 == ac.stages().len() {
        out.push(OutcomePath {
            outcomes: prefix.clone(),
            probability,
            final_distribution: joint,
        });
        return Ok(());
    }
    let n = ac.stages()[s].bit_count();
    for (idx, &p) in joint.iter().enumerate() {
        if p <= tolerances::ZERO_PROBABILITY {
            continue;
        }
        prefix.push(BitString::from_index(idx, n));
        staged_walk(ac, factory, s + 1, prefix, probability * p, out)?;
        prefix.pop();
    }
    Ok(())
}

/// Largest difference between two outcome trees, comparing joint
/// probabilities `p(path) * p(final | path)` over the union of paths.
pub fn outcome_tree_distance(a: &[OutcomePath], b: &[OutcomePath]) -> f64 {
    let joint = |paths: &[OutcomePath]| -> BTreeMap<(String, usize), f64> {
        let mut m = BTreeMap::new();
        for p in paths {
            let key: String = p.outcomes.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("|");
            for (i, q) in p.final_distribution.iter().enumerate() {
                m.insert((key.clone(), i), p.probability * q);
            }
        }
        m
    };
    let (ja, jb) = (joint(a), joint(b));
    ja.keys()
        .chain(jb.keys())
        .map(|k| (ja.get(k).copied().unwrap_or(0.0) - jb.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Output-density oracle of an adaptive circuit whose final distribution
/// does not depend on its intermediate outcomes: the nonadaptive circuit
/// for one guess `g'`, with the guessed groups fixed to `g'`.
pub struct FixedCircuitOracle {
    inner: Box<dyn DensityOracle>,
    partition: MeasurementPartition,
    offset: usize,
    guess_fixed: Assignment,
}

impl DensityOracle for FixedCircuitOracle {
    fn partition(&self) -> &MeasurementPartition {
        &self.partition
    }

    fn cond_prob(&self, i: usize, fixed: &Assignment) -> Result<Vec<f64>> {
        self.partition.check_query(i, fixed)?;
        let mut all = self.guess_fixed.clone();
        all.extend(fixed.iter().map(|(&j, &o)| (j + self.offset, o)));
        self.inner.cond_prob(i + self.offset, &all)
    }
}

impl FixedCircuitOracle {
    /// Exact distribution of the final outputs.
    pub fn output_distribution(&self) -> Result<Vec<f64>> {
        let order: Vec<usize> = (0..self.partition.len()).collect();
        chain_joint(self, &order, &Assignment::new())
    }
}

/// Validates the fix property by enumerating the outcome tree, then exposes
/// the density computation of the nonadaptive circuit for `guess` as the
/// adaptive circuit's output-density oracle.
pub fn fixed_circuit_density(
    ac: &AdaptiveCircuit,
    guess: &BitString,
    factory: &OracleFactory<'_>,
    cap: usize,
) -> Result<FixedCircuitOracle> {
    let deviation = fix_property_deviation(&enumerate_outcome_tree(ac, cap)?);
    if deviation > tolerances::FIX_PROPERTY {
        return Err(Error::FixViolation { deviation });
    }
    let last = ac.stages().len() - 1;
    let prior = ac.split_intermediate(guess)?;
    let (circuit, partition) = prefix_circuit(ac, last, &prior)?;
    let inner = factory(&circuit, &partition)?;
    let offset: usize = ac.stages()[..last].iter().map(|st| st.measure.len()).sum();
    let guess_fixed = fixed_from(ac, &prior);
    let outputs = MeasurementPartition::new(partition.groups()[offset..].to_vec())?;
    Ok(FixedCircuitOracle {
        inner,
        partition: outputs,
        offset,
        guess_fixed,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::circuit::{
        run_adaptive, ControlledPauli, ControlledPauliRule, FixedRule, PauliName, PlacedGate, Stage,
    };
    use crate::density::brute_force_factory;
    use crate::gate::Gate;
    use crate::gc_compile::compile_adaptive;
    use crate::metrics::{max_abs_diff, total_variation};
    use crate::rng::seeded;

    fn x_iff_b1() -> AdaptiveCircuit {
        let s1 = FixedRule::layers(2, vec![vec![PlacedGate::new(Gate::h(), vec![0])]]).unwrap();
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
            "",
            vec![],
            vec![
                Stage::new(Arc::new(s1), vec![Measurement::Standard(0)]),
                Stage::new(Arc::new(s2), vec![Measurement::Standard(1)]),
            ],
        )
        .unwrap()
    }

    fn gc_fixture() -> AdaptiveCircuit {
        let src = Circuit::new(
            2,
            vec![
                vec![PlacedGate::new(Gate::h(), vec![0])],
                vec![PlacedGate::new(Gate::cnot(), vec![0, 1])],
                vec![PlacedGate::new(Gate::t(), vec![1])],
            ],
            vec![0, 1],
        )
        .unwrap();
        compile_adaptive(&src).unwrap().adaptive().clone()
    }

    #[test]
    fn staged_tree_matches_enumeration() {
        for ac in [x_iff_b1(), gc_fixture()] {
            let a = enumerate_outcome_tree(&ac, 20).unwrap();
            let b = staged_outcome_tree(&ac, &brute_force_factory, 20).unwrap();
            assert_eq!(a.len(), b.len());
            assert!(outcome_tree_distance(&a, &b) < 1e-9);
        }
    }

    #[test]
    fn staged_sampling_reports_true_path_probability() {
        let ac = x_iff_b1();
        let mut rng = seeded(41);
        for _ in 0..10 {
            let run = adaptive_from_nonadaptive(&ac, &brute_force_factory, &mut rng).unwrap();
            assert_eq!(run.transcript.intermediate[0], run.transcript.final_bits);
            assert!((run.probability - 0.5).abs() < 1e-12);
        }
        // same outcomes frequency as run_adaptive
        let n = 2000;
        let (mut a, mut b) = (0, 0);
        for _ in 0..n {
            a += adaptive_from_nonadaptive(&ac, &brute_force_factory, &mut rng)
                .unwrap()
                .transcript
                .final_bits
                .get(0) as usize;
            b += run_adaptive(&ac, &mut rng).unwrap().final_bits.get(0) as usize;
        }
        assert!(((a as f64 - b as f64) / n as f64).abs() < 0.08);
    }

    #[test]
    fn fixed_oracle_is_guess_independent() {
        let ac = gc_fixture();
        let want = enumerate_outcome_tree(&ac, 20).unwrap()[0].final_distribution.clone();
        let mut dists = Vec::new();
        for g in ["1010", "0000", "0111"] {
            let o = fixed_circuit_density(&ac, &g.parse().unwrap(), &brute_force_factory, 20).unwrap();
            dists.push(o.output_distribution().unwrap());
        }
        for d in &dists {
            assert!(max_abs_diff(d, &want) < 1e-9);
        }
        assert!(total_variation(&dists[0], &dists[2]) < 1e-9);
    }

    #[test]
    fn non_fix_circuit_is_rejected() {
        let ac = x_iff_b1();
        assert!(matches!(
            fixed_circuit_density(&ac, &"0".parse().unwrap(), &brute_force_factory, 20),
            Err(Error::FixViolation { .. })
        ));
    }
}
