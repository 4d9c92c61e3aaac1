//! Density computation: conditional-probability oracles over a partition of
//! the measured qubits, and the samplers built on them.
//!
//! A [`MeasurementPartition`] splits the measured qubits into ordered groups
//! of one or two qubits. An oracle answers `p(b_i | b_j1 ... b_jk)` for any
//! group `i` and any assignment of outcomes to other groups. Outcomes of a
//! group are indexed first-qubit-most-significant, like every other
//! distribution in the crate.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::circuit::Measurement;
use crate::error::{Error, Result};
use crate::tolerances;

mod brute;
mod depth3;
mod dyadic;
mod staged;

pub use brute::{brute_force_factory, BruteForceOracle};
pub use depth3::{depth3_factory, Depth3Oracle, BLOCK_AMPLITUDE_BOUND};
pub use dyadic::{auto_coin_width, dyadic_simulation, SimulationSpec, MAX_COIN_WIDTH};
pub use staged::{
    adaptive_from_nonadaptive, fixed_circuit_density, outcome_tree_distance, prefix_circuit, staged_outcome_tree, FixedCircuitOracle,
    OracleFactory, StagedRun,
};

/// Largest group size. Bell measurements need exactly two.
pub const MAX_GROUP_SIZE: usize = 2;

/// Outcomes already fixed: group index to outcome index.
pub type Assignment = BTreeMap<usize, usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasurementPartition {
    groups: Vec<Vec<usize>>,
}

impl MeasurementPartition {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = Vec::new();
        for g in &groups {
            if g.is_empty() || g.len() > MAX_GROUP_SIZE {
                return Err(Error::Partition(format!("group {g:?} must hold 1 or 2 qubits")));
            }
            for &q in g {
                if seen.contains(&q) {
                    return Err(Error::Partition(format!("qubit {q} appears in two groups")));
                }
                seen.push(q);
            }
        }
        Ok(Self { groups })
    }

    pub fn singletons(qubits: &[usize]) -> Result<Self> {
        Self::new(qubits.iter().map(|&q| vec![q]).collect())
    }

    /// One group per measurement: a Bell pair is one group.
    pub fn from_measurements(measurements: &[Measurement]) -> Result<Self> {
        Self::new(measurements.iter().map(Measurement::qubits).collect())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// All qubits, group by group.
    pub fn qubits(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    pub fn outcome_count(&self, i: usize) -> usize {
        1 << self.groups[i].len()
    }

    /// Splits a concatenated bit string (groups in order) into per-group
    /// outcome indices.
    pub fn split(&self, bits: &BitString) -> Result<Vec<usize>> {
        let total: usize = self.groups.iter().map(Vec::len).sum();
        if bits.len() != total {
            return Err(Error::GuessLength {
                expected: total,
                found: bits.len(),
            });
        }
        let mut at = 0;
        Ok(self
            .groups
            .iter()
            .map(|g| {
                let v = bits.slice(at, at + g.len()).to_index();
                at += g.len();
                v
            })
            .collect())
    }

    pub(crate) fn check_query(&self, i: usize, fixed: &Assignment) -> Result<()> {
        if i >= self.len() {
            return Err(Error::Partition(format!("no group {i} in a partition of {}", self.len())));
        }
        if fixed.contains_key(&i) {
            return Err(Error::Partition(format!("group {i} is both queried and fixed")));
        }
        for (&j, &o) in fixed {
            if j >= self.len() || o >= self.outcome_count(j) {
                return Err(Error::Partition(format!("invalid fixed outcome {o} for group {j}")));
            }
        }
        Ok(())
    }

    /// Qubits and bits of a fixed assignment, for projection.
    pub(crate) fn fixed_bits(&self, fixed: &Assignment) -> (Vec<usize>, BitString) {
        let mut qubits = Vec::new();
        let mut bits = BitString::new();
        for (&j, &o) in fixed {
            qubits.extend(&self.groups[j]);
            bits.extend_from(&BitString::from_index(o, self.groups[j].len()));
        }
        (qubits, bits)
    }
}

/// Exact conditional probabilities over a measurement partition.
pub trait DensityOracle {
    fn partition(&self) -> &MeasurementPartition;

    /// Distribution of group `i`'s outcome given the fixed outcomes. Errors
    /// with [`Error::ZeroProbability`] if the fixed event is impossible.
    fn cond_prob(&self, i: usize, fixed: &Assignment) -> Result<Vec<f64>>;
}

impl<T: DensityOracle + ?Sized> DensityOracle for Box<T> {
    fn partition(&self) -> &MeasurementPartition {
        (**self).partition()
    }

    fn cond_prob(&self, i: usize, fixed: &Assignment) -> Result<Vec<f64>> {
        (**self).cond_prob(i, fixed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DensitySample {
    /// Outcome index per group, in partition order.
    pub outcomes: Vec<usize>,
    /// Concatenated bits, groups in partition order.
    pub bits: BitString,
    /// Number of conditional probabilities evaluated.
    pub evaluations: usize,
}

pub(crate) fn draw<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> Result<usize> {
    WeightedIndex::new(dist)
        .map(|w| w.sample(rng))
        .map_err(|e| Error::ZeroProbability {
            context: format!("cannot sample {dist:?}: {e}"),
        })
}

/// Samples every group in partition order, each conditioned on the groups
/// already fixed.
pub fn sample_via_density<O, R>(oracle: &O, rng: &mut R) -> Result<DensitySample>
where
    O: DensityOracle + ?Sized,
    R: Rng + ?Sized,
{
    let order: Vec<usize> = (0..oracle.partition().len()).collect();
    sample_in_order(oracle, &order, &Assignment::new(), rng)
}

/// Samples the listed groups in the given order on top of `fixed`. The
/// returned outcomes and bits cover the listed groups only, in list order.
pub fn sample_in_order<O, R>(oracle: &O, order: &[usize], fixed: &Assignment, rng: &mut R) -> Result<DensitySample>
where
    O: DensityOracle + ?Sized,
    R: Rng + ?Sized,
{
    let partition = oracle.partition();
    let mut fixed = fixed.clone();
    let mut outcomes = Vec::with_capacity(order.len());
    let mut bits = BitString::new();
    let mut evaluations = 0;
    for &i in order {
        let dist = oracle.cond_prob(i, &fixed)?;
        evaluations += dist.len();
        let o = draw(&dist, rng)?;
        fixed.insert(i, o);
        outcomes.push(o);
        bits.extend_from(&BitString::from_index(o, partition.group(i).len()));
    }
    Ok(DensitySample {
        outcomes,
        bits,
        evaluations,
    })
}

/// Exact joint distribution of the listed groups given `fixed`, built by
/// the chain rule in list order. Indexed by the concatenated bits of the
/// listed groups. Branches of probability at most
/// [`tolerances::ZERO_PROBABILITY`] are left at zero and not conditioned on.
pub fn chain_joint<O>(oracle: &O, order: &[usize], fixed: &Assignment) -> Result<Vec<f64>>
where
    O: DensityOracle + ?Sized,
{
    let partition = oracle.partition();
    let total_bits: usize = order.iter().map(|&i| partition.group(i).len()).sum();
    let mut joint = vec![0.0; 1 << total_bits];
    let mut fixed = fixed.clone();
    chain_walk(oracle, order, &mut fixed, 0, 1.0, 0, &mut joint)?;
    Ok(joint)
}

fn chain_walk<O>(
    oracle: &O,
    order: &[usize],
    fixed: &mut Assignment,
    depth: usize,
    prob: f64,
    key: usize,
    joint: &mut [f64],
) -> Result<()>
where
    O: DensityOracle + ?Sized,
{
    let Some(&i) = order.get(depth) else {
        joint[key] = prob;
        return Ok(());
    };
    let dist = oracle.cond_prob(i, fixed)?;
    let width = oracle.partition().group(i).len();
    for (o, &p) in dist.iter().enumerate() {
        if prob * p <= tolerances::ZERO_PROBABILITY {
            continue;
        }
        fixed.insert(i, o);
        chain_walk(oracle, order, fixed, depth + 1, prob * p, (key << width) | o, joint)?;
        fixed.remove(&i);
    }
    Ok(())
}
