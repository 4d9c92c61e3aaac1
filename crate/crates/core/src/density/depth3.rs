//! Density computation for depth-3 circuits without a global state vector.
//!
//! After the first gate layer the register is a product of blocks of at
//! most two qubits. The second gate layer and the final measurement are
//! treated as one measurement per layer-2 gate, in a two-qubit basis. Each
//! such measurement touches at most two blocks, so at most four qubits;
//! after projecting out the measured pair the rest is again a block of at
//! most two qubits.
//!
//! Conditionals on an arbitrary subset of groups skip the layer-2 gates of
//! groups that are neither queried nor fixed. Those qubits are traced out,
//! and a unitary acting only on traced-out qubits does not change the
//! marginal of the others; keeping the skipped qubits unmeasured inside
//! their blocks purifies the reduced state.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;

use super::{draw, Assignment, DensityOracle, DensitySample, MeasurementPartition};
use crate::bits::BitString;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::statevector::StateVector;

/// Largest amplitude object the simulator may build: four qubits.
pub const BLOCK_AMPLITUDE_BOUND: usize = 16;

#[derive(Clone, Debug)]
struct Block {
    /// Global qubit of each local qubit (local qubit `j` is bit `j`).
    qubits: Vec<usize>,
    state: StateVector,
}

#[derive(Clone, Debug)]
struct Group {
    qubits: Vec<usize>,
    /// Layer-2 gate on exactly these qubits, in group order.
    gate: Option<Gate>,
}

#[derive(Debug)]
pub struct Depth3Oracle {
    width: usize,
    partition: MeasurementPartition,
    blocks: Vec<Block>,
    block_of: Vec<usize>,
    groups: Vec<Group>,
    peak: AtomicUsize,
}

impl Depth3Oracle {
    /// Builds the block state after the first layer and groups the
    /// measured qubits by their layer-2 gates. Groups follow the first
    /// appearance of their qubits in `circuit.measured()`.
    pub fn new(circuit: &Circuit) -> Result<Self> {
        if circuit.depth() > 3 {
            return Err(Error::DepthExceeded {
                depth: circuit.depth(),
                max: 3,
            });
        }
        let width = circuit.width();
        let layers = circuit.layers();
        let mut peak = 1usize;

        let mut blocks = Vec::new();
        let mut block_of = vec![usize::MAX; width];
        if let Some(first) = layers.first() {
            for pg in first {
                let mut state = StateVector::zero_state(pg.targets.len())?;
                // local qubit j is targets[j]
                let local: Vec<usize> = (0..pg.targets.len()).collect();
                state.apply_gate(&pg.gate, &local)?;
                peak = peak.max(1 << pg.targets.len());
                for &q in &pg.targets {
                    block_of[q] = blocks.len();
                }
                blocks.push(Block {
                    qubits: pg.targets.clone(),
                    state,
                });
            }
        }
        for (q, b) in block_of.iter_mut().enumerate() {
            if *b == usize::MAX {
                *b = blocks.len();
                blocks.push(Block {
                    qubits: vec![q],
                    state: StateVector::zero_state(1)?,
                });
            }
        }

        let measured = circuit.measured();
        let is_measured = |q: usize| measured.contains(&q);
        let mut gate_of: Vec<Option<(usize, usize)>> = vec![None; width];
        let second: &[_] = layers.get(1).map(Vec::as_slice).unwrap_or(&[]);
        for (gi, pg) in second.iter().enumerate() {
            let m = pg.targets.iter().filter(|&&q| is_measured(q)).count();
            if m != 0 && m != pg.targets.len() {
                return Err(Error::NonMergeable(format!(
                    "layer-2 gate {} on {:?} mixes measured and unmeasured qubits",
                    pg.gate, pg.targets
                )));
            }
            for (pos, &q) in pg.targets.iter().enumerate() {
                gate_of[q] = Some((gi, pos));
            }
        }
        let mut groups: Vec<Group> = Vec::new();
        let mut grouped = vec![false; width];
        for &q in measured {
            if grouped[q] {
                continue;
            }
            match gate_of[q] {
                Some((gi, _)) => {
                    let pg = &second[gi];
                    for &t in &pg.targets {
                        grouped[t] = true;
                    }
                    groups.push(Group {
                        qubits: pg.targets.clone(),
                        gate: Some(pg.gate.clone()),
                    });
                }
                None => {
                    grouped[q] = true;
                    groups.push(Group {
                        qubits: vec![q],
                        gate: None,
                    });
                }
            }
        }
        let partition = MeasurementPartition::new(groups.iter().map(|g| g.qubits.clone()).collect())?;
        Ok(Self {
            width,
            partition,
            blocks,
            block_of,
            groups,
            peak: AtomicUsize::new(peak),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Largest number of amplitudes held in one object so far.
    pub fn peak_amplitudes(&self) -> usize {
        self.peak.load(Ordering::Relaxed)
    }

    fn note(&self, dim: usize) {
        self.peak.fetch_max(dim, Ordering::Relaxed);
    }

    /// Merges the blocks holding group `i`, applies its layer-2 gate and
    /// returns the merged block with the group's local positions.
    fn merged(&self, blocks: &mut [Option<Block>], block_of: &[usize], i: usize) -> Result<(Block, Vec<usize>)> {
        let group = &self.groups[i];
        let mut ids: Vec<usize> = group.qubits.iter().map(|&q| block_of[q]).collect();
        ids.dedup();
        let mut merged: Option<Block> = None;
        for &b in &ids {
            let block = blocks[b].take().expect("live block");
            merged = Some(match merged {
                None => block,
                Some(acc) => Block {
                    state: acc.state.tensor(&block.state)?,
                    qubits: acc.qubits.into_iter().chain(block.qubits).collect(),
                },
            });
        }
        let mut merged = merged.expect("group has qubits");
        self.note(merged.state.amplitudes().len());
        let local: Vec<usize> = group
            .qubits
            .iter()
            .map(|q| merged.qubits.iter().position(|x| x == q).expect("qubit in its block"))
            .collect();
        if let Some(g) = &group.gate {
            merged.state.apply_gate(g, &local)?;
        }
        Ok((merged, local))
    }

    /// Projects group `i` of the merged block onto `outcome` and stores the
    /// residual block. Returns the outcome probability.
    fn settle(
        &self,
        blocks: &mut Vec<Option<Block>>,
        block_of: &mut [usize],
        merged: Block,
        local: &[usize],
        outcome: usize,
    ) -> Result<f64> {
        let bits = BitString::from_index(outcome, local.len());
        let (p, residual) = merged.state.reduce_fixed(local, &bits)?;
        if let Some(state) = residual {
            let qubits: Vec<usize> = (0..merged.qubits.len())
                .filter(|j| !local.contains(j))
                .map(|j| merged.qubits[j])
                .collect();
            self.note(state.amplitudes().len());
            for &q in &qubits {
                block_of[q] = blocks.len();
            }
            blocks.push(Some(Block { qubits, state }));
        }
        Ok(p)
    }

    fn fresh(&self) -> (Vec<Option<Block>>, Vec<usize>) {
        (self.blocks.iter().cloned().map(Some).collect(), self.block_of.clone())
    }

    /// Samples every group in partition order in a single pass, keeping
    /// only the `requested` groups' bits (all groups when `None`).
    pub fn sample<R: Rng + ?Sized>(&self, requested: Option<&[usize]>, rng: &mut R) -> Result<DensitySample> {
        let (mut blocks, mut block_of) = self.fresh();
        let mut outcomes = Vec::new();
        let mut bits = BitString::new();
        let mut evaluations = 0;
        for i in 0..self.groups.len() {
            let (merged, local) = self.merged(&mut blocks, &block_of, i)?;
            let dist = merged.state.outcome_distribution(&local)?;
            evaluations += dist.len();
            let o = draw(&dist, rng)?;
            self.settle(&mut blocks, &mut block_of, merged, &local, o)?;
            if requested.is_none_or(|r| r.contains(&i)) {
                outcomes.push(o);
                bits.extend_from(&BitString::from_index(o, local.len()));
            }
        }
        Ok(DensitySample {
            outcomes,
            bits,
            evaluations,
        })
    }
}

impl DensityOracle for Depth3Oracle {
    fn partition(&self) -> &MeasurementPartition {
        &self.partition
    }

    fn cond_prob(&self, i: usize, fixed: &Assignment) -> Result<Vec<f64>> {
        self.partition.check_query(i, fixed)?;
        let (mut blocks, mut block_of) = self.fresh();
        for (&j, &o) in fixed {
            let (merged, local) = self.merged(&mut blocks, &block_of, j)?;
            self.settle(&mut blocks, &mut block_of, merged, &local, o)
                .map_err(|e| match e {
                    Error::ZeroProbability { .. } => Error::ZeroProbability {
                        context: format!("group {j} fixed to {o} given earlier groups"),
                    },
                    e => e,
                })?;
        }
        let (merged, local) = self.merged(&mut blocks, &block_of, i)?;
        let dist = merged.state.outcome_distribution(&local)?;
        let total: f64 = dist.iter().sum();
        Ok(dist.into_iter().map(|p| p / total).collect())
    }
}

/// Factory producing [`Depth3Oracle`]s. The partition must equal the one
/// the oracle derives from the circuit.
pub fn depth3_factory(circuit: &Circuit, partition: &MeasurementPartition) -> Result<Box<dyn DensityOracle>> {
    let o = Depth3Oracle::new(circuit)?;
    if o.partition() != partition {
        return Err(Error::Partition(format!(
            "depth-3 grouping {:?} differs from requested {:?}",
            o.partition().groups(),
            partition.groups()
        )));
    }
    Ok(Box::new(o))
}
