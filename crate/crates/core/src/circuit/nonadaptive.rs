use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Circuit, RunTranscript};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::tolerances;

/// A single nonadaptive circuit produced for one guess `g` of the
/// intermediate outcomes.
///
/// `base` measures `guess_qubits` followed by `outputs` at its final step.
/// The bits read on `guess_qubits` form `y`; conditioned on `y == g` the
/// bits on `outputs` follow the adaptive circuit's output distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonadaptiveJson")]
pub struct NonadaptiveCircuit {
    #[serde(rename = "circuit")]
    base: Circuit,
    guess: BitString,
    guess_qubits: Vec<usize>,
    outputs: Vec<usize>,
}

#[derive(Deserialize)]
struct NonadaptiveJson {
    circuit: Circuit,
    guess: BitString,
    guess_qubits: Vec<usize>,
    outputs: Vec<usize>,
}

impl TryFrom<NonadaptiveJson> for NonadaptiveCircuit {
    type Error = Error;

    fn try_from(v: NonadaptiveJson) -> Result<Self> {
        Self::new(v.circuit, v.guess, v.guess_qubits, v.outputs)
    }
}

/// Output distribution conditioned on `y == g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PostSelection {
    pub hit_probability: f64,
    pub distribution: Vec<f64>,
}

impl NonadaptiveCircuit {
    pub fn new(base: Circuit, guess: BitString, guess_qubits: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        if guess.len() != guess_qubits.len() {
            return Err(Error::GuessLength {
                expected: guess_qubits.len(),
                found: guess.len(),
            });
        }
        let expected: Vec<usize> = guess_qubits.iter().chain(&outputs).copied().collect();
        if base.measured() != expected.as_slice() {
            return Err(Error::Format(format!(
                "measured qubits {:?} differ from guess qubits followed by outputs {:?}",
                base.measured(),
                expected
            )));
        }
        Ok(Self {
            base,
            guess,
            guess_qubits,
            outputs,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.base
    }

    pub fn guess(&self) -> &BitString {
        &self.guess
    }

    pub fn guess_qubits(&self) -> &[usize] {
        &self.guess_qubits
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn depth(&self) -> usize {
        self.base.depth()
    }

    /// Exact `Pr[y == g]`.
    pub fn guess_hit_probability(&self) -> Result<f64> {
        self.base.run()?.probability_of(&self.guess_qubits, &self.guess)
    }

    /// Exact joint distribution of `(y, outputs)`, indexed with `y` as the
    /// more significant part.
    pub fn joint_distribution(&self) -> Result<Vec<f64>> {
        self.base.output_distribution()
    }

    /// Exact output distribution conditioned on `y == g`.
    pub fn postselect(&self) -> Result<PostSelection> {
        let state = self.base.run()?;
        let hit = state.probability_of(&self.guess_qubits, &self.guess)?;
        if hit <= tolerances::ZERO_PROBABILITY {
            return Err(Error::ZeroProbability {
                context: format!("guess {} is never observed", self.guess),
            });
        }
        let (_, post) = state
            .project(&self.guess_qubits, &self.guess)?
            .expect("nonzero branch");
        Ok(PostSelection {
            hit_probability: hit,
            distribution: post.outcome_distribution(&self.outputs)?,
        })
    }
}

/// One shot: every measured qubit is read at the final step.
pub fn run_nonadaptive<R: Rng + ?Sized>(nc: &NonadaptiveCircuit, rng: &mut R) -> Result<RunTranscript> {
    let bits = nc.base.run()?.sample(nc.base.measured(), rng)?;
    let k = nc.guess_qubits.len();
    let y = bits.slice(0, k);
    let final_bits = bits.slice(k, bits.len());
    let guess_hit = Some(y == nc.guess);
    Ok(RunTranscript {
        intermediate: if k == 0 { Vec::new() } else { vec![y] },
        final_bits,
        guess_hit,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::circuit::{
        enumerate_outcome_tree, AdaptiveCircuit, ControlledPauli, ControlledPauliRule, FixedRule, Measurement,
        PauliName, PlacedGate, Stage,
    };
    use crate::gate::Gate;
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

    #[test]
    fn flatten_and_postselect_match_branch() {
        let ac = x_iff_b1();
        let paths = enumerate_outcome_tree(&ac, 20).unwrap();
        for g in ["0", "1"] {
            let g: BitString = g.parse().unwrap();
            let nc = ac.flatten(&g).unwrap();
            let post = nc.postselect().unwrap();
            assert!((post.hit_probability - 0.5).abs() < 1e-12);
            let branch = paths.iter().find(|p| p.outcomes[0] == g).unwrap();
            assert!(total_variation(&post.distribution, &branch.final_distribution) < 1e-12);
        }
    }

    #[test]
    fn sampled_hits_follow_hit_probability() {
        let nc = x_iff_b1().flatten(&"1".parse().unwrap()).unwrap();
        let mut rng = seeded(9);
        let n = 4000;
        let mut hits = 0;
        for _ in 0..n {
            let t = run_nonadaptive(&nc, &mut rng).unwrap();
            if t.guess_hit == Some(true) {
                hits += 1;
                assert_eq!(t.final_bits.to_string(), "1");
            }
        }
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.05, "{rate}");
    }

    #[test]
    fn joint_distribution_marginalizes_to_hit_probability() {
        let nc = x_iff_b1().flatten(&"0".parse().unwrap()).unwrap();
        let joint = nc.joint_distribution().unwrap();
        // y is the high bit
        let hit: f64 = joint[..2].iter().sum();
        assert!((hit - nc.guess_hit_probability().unwrap()).abs() < 1e-14);
        assert!(max_abs_diff(&joint, &[0.5, 0.0, 0.5, 0.0]) < 1e-12);
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let nc = x_iff_b1().flatten(&"1".parse().unwrap()).unwrap();
        let text = serde_json::to_string(&nc).unwrap();
        let back: NonadaptiveCircuit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, nc);
        assert!(matches!(
            NonadaptiveCircuit::new(nc.circuit().clone(), "11".parse().unwrap(), vec![0], vec![1]),
            Err(Error::GuessLength { .. })
        ));
        assert!(NonadaptiveCircuit::new(nc.circuit().clone(), "1".parse().unwrap(), vec![1], vec![0]).is_err());
    }
}
