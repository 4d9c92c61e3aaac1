//! Dense state-vector simulation.
//!
//! Qubit `q` is bit `q` of the amplitude index (little-endian). Lists of
//! qubits, on the other hand, are read first-is-most-significant: the
//! marginal over `[a, b]` is indexed by `2 * bit(a) + bit(b)`, matching the
//! local ordering of two-qubit gate matrices and the text form of
//! [`BitString`].
//!
//! Measured qubits stay in the register. A measurement projects and
//! renormalizes; callers that track a shrinking register mark the qubit as
//! consumed instead of removing it. [`StateVector::reduce_fixed`] is the one
//! operation that does drop qubits, for code that wants the smaller register.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::tolerances;

/// Default upper bound on the register width (2^26 amplitudes, 1 GiB).
pub const DEFAULT_MAX_WIDTH: usize = 26;

/// Environment variable that overrides [`DEFAULT_MAX_WIDTH`].
pub const MAX_WIDTH_ENV: &str = "CDSIM_MAX_WIDTH";

pub fn max_width() -> usize {
    std::env::var(MAX_WIDTH_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_WIDTH)
}

/// A measurement result: the observed bits and the probability with which
/// they were observed.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub bits: BitString,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `width` qubits.
    pub fn zero_state(width: usize) -> Result<Self> {
        check_width(width)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << width];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { width, amps })
    }

    pub fn basis_state(width: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero_state(width)?;
        if index >= s.amps.len() {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for width {width}"
            )));
        }
        s.amps[0] = C64::new(0.0, 0.0);
        s.amps[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps an amplitude vector whose length is a power of two and whose
    /// norm is 1 within [`tolerances::NORM`].
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let width = len.trailing_zeros() as usize;
        check_width(width)?;
        let s = Self { width, amps };
        let norm_sqr = s.norm_sqr();
        if (norm_sqr - 1.0).abs() > tolerances::NORM {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(s)
    }

    /// Normalizes `amps` before wrapping them.
    pub fn from_unnormalized(mut amps: Vec<C64>) -> Result<Self> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n <= 0.0 {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Self::from_amplitudes(amps)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        check_qubits(qubits, self.width)
    }

    /// Applies `gate` to `targets` (tensored with the identity elsewhere).
    pub fn apply_gate(&mut self, gate: &Gate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::ArityMismatch {
                expected: gate.arity(),
                found: targets.len(),
            });
        }
        self.check_qubits(targets)?;
        match targets {
            [q] => self.apply_one(gate, *q),
            [a, b] => self.apply_two(gate, *a, *b),
            _ => unreachable!("gate arity is 1 or 2"),
        }
        Ok(())
    }

    fn apply_one(&mut self, gate: &Gate, q: usize) {
        let (m00, m01, m10, m11) = (gate.at(0, 0), gate.at(0, 1), gate.at(1, 0), gate.at(1, 1));
        let bit = 1usize << q;
        for i0 in 0..self.amps.len() {
            if i0 & bit != 0 {
                continue;
            }
            let i1 = i0 | bit;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = m00 * a0 + m01 * a1;
            self.amps[i1] = m10 * a0 + m11 * a1;
        }
    }

    fn apply_two(&mut self, gate: &Gate, a: usize, b: usize) {
        let (ba, bb) = (1usize << a, 1usize << b);
        let m = gate.matrix();
        for base in 0..self.amps.len() {
            if base & (ba | bb) != 0 {
                continue;
            }
            // local index 2*bit(a) + bit(b)
            let idx = [base, base | bb, base | ba, base | ba | bb];
            let v = idx.map(|i| self.amps[i]);
            for (row, &i) in idx.iter().enumerate() {
                self.amps[i] = m[row * 4] * v[0]
                    + m[row * 4 + 1] * v[1]
                    + m[row * 4 + 2] * v[2]
                    + m[row * 4 + 3] * v[3];
            }
        }
    }

    /// Probability that `qubit` reads 1.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubits(&[qubit])?;
        let bit = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Standard-basis measurement of one qubit. The qubit stays in the
    /// register, projected onto the observed value.
    pub fn measure_standard<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        let p1 = self.probability_one(qubit)?.clamp(0.0, 1.0);
        let p0 = 1.0 - p1;
        let bit = if p1 <= tolerances::ZERO_PROBABILITY {
            0
        } else if p0 <= tolerances::ZERO_PROBABILITY {
            1
        } else if rng.gen::<f64>() < p0 {
            0
        } else {
            1
        };
        let probability = if bit == 0 { p0 } else { p1 };
        self.project_in_place(&[qubit], &[bit], probability);
        Ok(MeasurementOutcome {
            bits: BitString::from_bits([bit]),
            probability,
        })
    }

    /// Bell measurement on `(q1, q2)`: the Bell rotation followed by two
    /// standard measurements. Outcome bits are `(bit(q1), bit(q2))`, so
    /// `00`, `01`, `10`, `11` report Psi+, Psi-, Phi+, Phi-.
    pub fn measure_bell<R: Rng + ?Sized>(
        &mut self,
        q1: usize,
        q2: usize,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        self.apply_gate(&Gate::bell_rotation(), &[q1, q2])?;
        let first = self.measure_standard(q1, rng)?;
        let second = self.measure_standard(q2, rng)?;
        Ok(MeasurementOutcome {
            bits: BitString::concat([&first.bits, &second.bits]),
            probability: first.probability * second.probability,
        })
    }

    fn project_in_place(&mut self, qubits: &[usize], bits: &[u8], probability: f64) {
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if matches_bits(i, qubits, bits) {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
    }

    /// Probability of reading `bits` on `qubits`.
    pub fn probability_of(&self, qubits: &[usize], bits: &BitString) -> Result<f64> {
        self.check_qubits(qubits)?;
        check_bit_count(qubits, bits)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| matches_bits(*i, qubits, bits.bits()))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects onto `bits` on `qubits` without sampling. Returns the branch
    /// probability and the renormalized state, or `None` for a
    /// zero-probability branch.
    pub fn project(&self, qubits: &[usize], bits: &BitString) -> Result<Option<(f64, StateVector)>> {
        let p = self.probability_of(qubits, bits)?;
        if p <= tolerances::ZERO_PROBABILITY {
            return Ok(None);
        }
        let mut out = self.clone();
        out.project_in_place(qubits, bits.bits(), p);
        Ok(Some((p, out)))
    }

    /// Projects onto `bits` on `qubits` and removes those qubits, yielding
    /// the register of the remaining qubits in ascending order of their
    /// original indices. Returns `(probability, residual)`; the residual is
    /// `None` when no qubits remain.
    pub fn reduce_fixed(
        &self,
        qubits: &[usize],
        bits: &BitString,
    ) -> Result<(f64, Option<StateVector>)> {
        self.check_qubits(qubits)?;
        check_bit_count(qubits, bits)?;
        let keep: Vec<usize> = (0..self.width).filter(|q| !qubits.contains(q)).collect();
        let mut fixed_mask = 0usize;
        for (&q, &b) in qubits.iter().zip(bits.bits()) {
            fixed_mask |= (b as usize) << q;
        }
        let mut residual = vec![C64::new(0.0, 0.0); 1 << keep.len()];
        for (j, slot) in residual.iter_mut().enumerate() {
            let mut full = fixed_mask;
            for (pos, &q) in keep.iter().enumerate() {
                full |= ((j >> pos) & 1) << q;
            }
            *slot = self.amps[full];
        }
        let p: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
        if p <= tolerances::ZERO_PROBABILITY {
            return Err(Error::ZeroProbability {
                context: format!("qubits {qubits:?} fixed to {bits}"),
            });
        }
        if keep.is_empty() {
            return Ok((p, None));
        }
        let scale = 1.0 / p.sqrt();
        residual.iter_mut().for_each(|a| *a *= scale);
        Ok((
            p,
            Some(StateVector {
                width: keep.len(),
                amps: residual,
            }),
        ))
    }

    /// `self (x) other`: `self` keeps qubits `0..w`, `other` moves to
    /// `w..w+w'`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let width = self.width + other.width;
        check_width(width)?;
        let mut amps = Vec::with_capacity(1 << width);
        for hi in &other.amps {
            for lo in &self.amps {
                amps.push(lo * hi);
            }
        }
        Ok(StateVector { width, amps })
    }

    /// Exact marginal distribution over `qubits` in the standard basis,
    /// indexed first-qubit-most-significant.
    pub fn outcome_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let n = qubits.len();
        let mut dist = vec![0.0; 1 << n];
        for (i, a) in self.amps.iter().enumerate() {
            let mut key = 0usize;
            for &q in qubits {
                key = (key << 1) | ((i >> q) & 1);
            }
            dist[key] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Samples a standard-basis outcome of the whole register and reads it
    /// off on `qubits`, without changing the state.
    pub fn sample<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<BitString> {
        self.check_qubits(qubits)?;
        let mut r = rng.gen::<f64>() * self.norm_sqr();
        let mut index = self.amps.len() - 1;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if r < p {
                index = i;
                break;
            }
            r -= p;
        }
        // never land on a zero-probability tail through rounding
        while self.amps[index].norm_sqr() == 0.0 && index > 0 {
            index -= 1;
        }
        Ok(BitString::from_bits(qubits.iter().map(|&q| ((index >> q) & 1) as u8)))
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: other.width,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub(crate) fn check_width(width: usize) -> Result<()> {
    let max = max_width();
    if width == 0 || width > max {
        return Err(Error::WidthOutOfRange { width, max });
    }
    Ok(())
}

pub(crate) fn check_qubits(qubits: &[usize], width: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= width {
            return Err(Error::QubitOutOfRange { qubit: q, width });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit { qubit: q });
        }
    }
    Ok(())
}

fn check_bit_count(qubits: &[usize], bits: &BitString) -> Result<()> {
    if qubits.len() != bits.len() {
        return Err(Error::ArityMismatch {
            expected: qubits.len(),
            found: bits.len(),
        });
    }
    Ok(())
}

#[inline]
fn matches_bits(index: usize, qubits: &[usize], bits: &[u8]) -> bool {
    qubits
        .iter()
        .zip(bits)
        .all(|(&q, &b)| ((index >> q) & 1) as u8 == b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_one_qubit, random_state, random_two_qubit};
    use crate::rng::seeded;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_state_examples() {
        let s = StateVector::zero_state(1).unwrap();
        assert_eq!(s.amplitudes(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let s = StateVector::zero_state(2).unwrap();
        assert_eq!(s.amplitudes().len(), 4);
        assert_eq!(s.amplitude(0), C64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == C64::new(0.0, 0.0)));
        assert!((StateVector::zero_state(3).unwrap().norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_state_width_bounds() {
        assert!(matches!(
            StateVector::zero_state(0),
            Err(Error::WidthOutOfRange { .. })
        ));
        assert!(matches!(
            StateVector::zero_state(DEFAULT_MAX_WIDTH + 1),
            Err(Error::WidthOutOfRange { .. })
        ));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_gate(&Gate::h(), &[0]).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitude(0), h) && close(s.amplitude(1), h));
    }

    #[test]
    fn cnot_truth_table() {
        // |10> in target order (control=q0 set): index 1
        let mut s = StateVector::basis_state(2, 0b01).unwrap();
        s.apply_gate(&Gate::cnot(), &[0, 1]).unwrap();
        assert!(close(s.amplitude(0b11), C64::new(1.0, 0.0)));
        for (input, output) in [(0b00, 0b00), (0b10, 0b10), (0b11, 0b01)] {
            let mut s = StateVector::basis_state(2, input).unwrap();
            s.apply_gate(&Gate::cnot(), &[0, 1]).unwrap();
            assert!(close(s.amplitude(output), C64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn x_is_an_involution() {
        let mut rng = seeded(3);
        let s0 = random_state(4, &mut rng).unwrap();
        let mut s = s0.clone();
        s.apply_gate(&Gate::x(), &[2]).unwrap();
        s.apply_gate(&Gate::x(), &[2]).unwrap();
        for (a, b) in s.amplitudes().iter().zip(s0.amplitudes()) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn target_validation() {
        let mut s = StateVector::zero_state(2).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::cnot(), &[1, 1]),
            Err(Error::DuplicateQubit { qubit: 1 })
        ));
        assert!(matches!(
            s.apply_gate(&Gate::h(), &[2]),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            s.apply_gate(&Gate::h(), &[0, 1]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn measure_eigenstate_and_bell_pair() {
        let mut rng = seeded(1);
        let mut s = StateVector::zero_state(1).unwrap();
        let m = s.measure_standard(0, &mut rng).unwrap();
        assert_eq!(m.bits.to_string(), "0");
        assert_eq!(m.probability, 1.0);

        let mut bell = StateVector::zero_state(2).unwrap();
        bell.apply_gate(&Gate::phi_plus_prep(), &[0, 1]).unwrap();
        assert!((bell.probability_one(0).unwrap() - 0.5).abs() < 1e-12);
        for seed in 0..8 {
            let mut s = bell.clone();
            let m = s.measure_standard(0, &mut seeded(seed)).unwrap();
            assert!((m.probability - 0.5).abs() < 1e-12);
            let b = m.bits.get(0) as usize;
            assert!(close(s.amplitude(b | (b << 1)), C64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn measurement_is_reproducible() {
        let mut plus = StateVector::zero_state(1).unwrap();
        plus.apply_gate(&Gate::h(), &[0]).unwrap();
        let bits: Vec<String> = (0..2)
            .map(|_| {
                let mut rng = seeded(42);
                (0..16)
                    .map(|_| plus.clone().measure_standard(0, &mut rng).unwrap().bits.to_string())
                    .collect()
            })
            .collect();
        assert_eq!(bits[0], bits[1]);
    }

    #[test]
    fn bell_measurement_encoding() {
        let mut rng = seeded(5);
        // Phi+ on (0,1) reports 10 with certainty
        let mut s = StateVector::zero_state(3).unwrap();
        s.apply_gate(&Gate::h(), &[2]).unwrap();
        s.apply_gate(&Gate::phi_plus_prep(), &[0, 1]).unwrap();
        let m = s.measure_bell(0, 1, &mut rng).unwrap();
        assert_eq!(m.bits.to_string(), "10");
        assert!((m.probability - 1.0).abs() < 1e-12);

        // |00> = (Phi+ + Phi-)/sqrt2
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_gate(&Gate::bell_rotation(), &[0, 1]).unwrap();
        let d = s.outcome_distribution(&[0, 1]).unwrap();
        let expect = [0.0, 0.0, 0.5, 0.5];
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_outcomes_uniform_on_half_of_a_maximally_mixed_pair() {
        // q0 maximally entangled with q2, q1 in an arbitrary state: the
        // reduced state on (q0, q1) is (I/2) x rho.
        let mut rng = seeded(9);
        let mut s = StateVector::zero_state(3).unwrap();
        s.apply_gate(&Gate::phi_plus_prep(), &[0, 2]).unwrap();
        s.apply_gate(&random_one_qubit(&mut rng), &[1]).unwrap();
        s.apply_gate(&Gate::bell_rotation(), &[0, 1]).unwrap();
        for p in s.outcome_distribution(&[0, 1]).unwrap() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_and_fidelity_examples() {
        let mut s = StateVector::zero_state(2).unwrap();
        assert_eq!(s.outcome_distribution(&[0, 1]).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        s.apply_gate(&Gate::h(), &[0]).unwrap();
        let d = s.outcome_distribution(&[0]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-12);

        let zero = StateVector::zero_state(1).unwrap();
        let one = StateVector::basis_state(1, 1).unwrap();
        let mut plus = zero.clone();
        plus.apply_gate(&Gate::h(), &[0]).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            fidelity(&zero, &StateVector::zero_state(2).unwrap()),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn reduce_fixed_drops_qubits() {
        // (|00> + |11>)/sqrt2 on (0,1), |1> on 2
        let mut s = StateVector::zero_state(3).unwrap();
        s.apply_gate(&Gate::phi_plus_prep(), &[0, 1]).unwrap();
        s.apply_gate(&Gate::x(), &[2]).unwrap();
        let (p, rest) = s.reduce_fixed(&[1], &"1".parse().unwrap()).unwrap();
        let rest = rest.unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(rest.width(), 2);
        // remaining (q0, q2) = |1>|1> -> index 0b11
        assert!(close(rest.amplitude(0b11), C64::new(1.0, 0.0)));
        assert!(matches!(
            StateVector::zero_state(1).unwrap().reduce_fixed(&[0], &"1".parse().unwrap()),
            Err(Error::ZeroProbability { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norm_is_preserved(seed in any::<u64>(), steps in 1usize..40) {
            let mut rng = seeded(seed);
            let mut s = random_state(5, &mut rng).unwrap();
            for _ in 0..steps {
                if rng.gen::<bool>() {
                    let q = rng.gen_range(0..5);
                    s.apply_gate(&random_one_qubit(&mut rng), &[q]).unwrap();
                } else {
                    let a = rng.gen_range(0..5);
                    let b = (a + rng.gen_range(1..5)) % 5;
                    s.apply_gate(&random_two_qubit(&mut rng), &[a, b]).unwrap();
                }
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < tolerances::NORM);
        }

        #[test]
        fn measurement_chain_rule(seed in any::<u64>(), q1 in 0usize..4, shift in 1usize..4) {
            let q2 = (q1 + shift) % 4;
            let s = random_state(4, &mut seeded(seed)).unwrap();
            let marginal = s.outcome_distribution(&[q2]).unwrap();
            let mut total = [0.0; 2];
            for b1 in 0..2 {
                let bits = BitString::from_index(b1, 1);
                if let Some((p1, post)) = s.project(&[q1], &bits).unwrap() {
                    let cond = post.outcome_distribution(&[q2]).unwrap();
                    total[0] += p1 * cond[0];
                    total[1] += p1 * cond[1];
                }
            }
            prop_assert!((total[0] - marginal[0]).abs() < 1e-10);
            prop_assert!((total[1] - marginal[1]).abs() < 1e-10);
        }

        #[test]
        fn bell_basis_is_complete(seed in any::<u64>(), a in 0usize..4, shift in 1usize..4) {
            let b = (a + shift) % 4;
            let mut s = random_state(4, &mut seeded(seed)).unwrap();
            s.apply_gate(&Gate::bell_rotation(), &[a, b]).unwrap();
            let total: f64 = s.outcome_distribution(&[a, b]).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn seeded_transcripts_repeat(seed in any::<u64>()) {
            let s = random_state(4, &mut seeded(seed)).unwrap();
            let run = |seed: u64| {
                let mut rng = seeded(seed);
                let mut st = s.clone();
                (0..4).map(|q| st.measure_standard(q, &mut rng).unwrap().bits.to_string()).collect::<String>()
            };
            prop_assert_eq!(run(seed), run(seed));
        }
    }
}
