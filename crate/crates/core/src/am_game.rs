//! The two-round public-coin game for approximate set size.
//!
//! Arthur sends `l = p + 1` random GF(2)-linear hashes from `u·n` bits to
//! `p` bits together with `l²` random `p`-bit targets; Merlin answers with a
//! member `t` of the `u`-fold product set whose hash under some `h_i` hits a
//! target. Merlin here is an exhaustive search, so its answer exists
//! exactly when some witness exists.
//!
//! All logarithms are base 2.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::density::SimulationSpec;
use crate::error::{Error, Result};
use crate::rng::trial_rng;

/// Largest `u·n` Merlin will search.
pub const MAX_UNIVERSE_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameParameters {
    pub epsilon: f64,
    pub n: u32,
    pub k: u32,
    pub d: f64,
    /// Number of product copies.
    pub u: u32,
    pub big: f64,
    pub small: f64,
    /// `big^u` and `small^u`: thresholds for the product set.
    pub big_total: f64,
    pub small_total: f64,
    /// Hash output width, `floor(8 log big_total)`.
    pub p: u32,
    /// Number of hash functions, `p + 1`.
    pub l: u32,
}

impl GameParameters {
    pub fn new(epsilon: f64, n: u32, k: u32, d: f64) -> Result<Self> {
        if !(0.0..1.0 / 3.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "accuracy {epsilon} must satisfy 0 <= epsilon < 1/3"
            )));
        }
        if n == 0 || k > n || n > 63 {
            return Err(Error::InvalidParameter(format!("need 0 <= k <= n <= 63, got n = {n}, k = {k}")));
        }
        if d.is_nan() || d <= 8.0 {
            return Err(Error::InvalidParameter(format!("target ratio d = {d} must exceed 8")));
        }
        let ratio = (2.0 - 2.0 * epsilon) / (1.0 + epsilon);
        let u = ((d / 8.0).log2() / ratio.log2() - 1e-12).ceil().max(1.0) as u32;
        let scale = 2f64.powi((n - k) as i32);
        let big = (1.0 - epsilon) * (2.0 / 3.0) * scale;
        let small = (1.0 + epsilon) * (1.0 / 3.0) * scale;
        let big_total = big.powi(u as i32);
        let small_total = small.powi(u as i32);
        let p = (8.0 * big_total.log2()).floor();
        if p.is_nan() || !(1.0..=63.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "hash width floor(8 log {big_total}) = {p} outside 1..=63"
            )));
        }
        let p = p as u32;
        Ok(Self {
            epsilon,
            n,
            k,
            d,
            u,
            big,
            small,
            big_total,
            small_total,
            p,
            l: p + 1,
        })
    }

    pub fn universe_bits(&self) -> u32 {
        self.u * self.n
    }

    pub fn target_count(&self) -> usize {
        (self.l * self.l) as usize
    }

    /// Lower bound on Merlin's success when the product set is big.
    pub fn completeness_bound(&self) -> f64 {
        1.0 - 2f64.powf(-(self.l as f64) / 8.0)
    }

    /// Upper bound on Merlin's success when the product set is small.
    pub fn soundness_bound(&self) -> f64 {
        (self.l as f64).powi(3) / self.d
    }

    /// The soundness bound says nothing when it reaches 1.
    pub fn soundness_vacuous(&self) -> bool {
        self.soundness_bound() >= 1.0
    }

    /// Midpoint between the completeness bound and the soundness bound
    /// (clamped to 1).
    pub fn threshold(&self) -> f64 {
        0.5 * (self.completeness_bound() + self.soundness_bound().min(1.0))
    }
}

/// `h(x) = M x` over GF(2), with one `p`-bit row per input bit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashFunction {
    rows: Vec<u64>,
    p: u32,
}

impl HashFunction {
    pub fn random<R: Rng + ?Sized>(input_bits: u32, p: u32, rng: &mut R) -> Self {
        let mask = low_mask(p);
        Self {
            rows: (0..input_bits).map(|_| rng.gen::<u64>() & mask).collect(),
            p,
        }
    }

    pub fn from_rows(rows: Vec<u64>, p: u32) -> Self {
        let mask = low_mask(p);
        Self {
            rows: rows.into_iter().map(|r| r & mask).collect(),
            p,
        }
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Row `i` multiplies input bit `i` (the integer's bit `i`).
    pub fn apply(&self, x: u64) -> u64 {
        let mut acc = 0;
        let mut rest = x;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            acc ^= self.rows[i];
            rest &= rest - 1;
        }
        acc
    }
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Challenge {
    pub hashes: Vec<HashFunction>,
    pub targets: Vec<u64>,
}

impl Challenge {
    /// Index of the first hash mapping `t` into the targets.
    pub fn hit(&self, t: u64) -> Option<usize> {
        let z: HashSet<u64> = self.targets.iter().copied().collect();
        self.hit_in(&z, t)
    }

    fn hit_in(&self, z: &HashSet<u64>, t: u64) -> Option<usize> {
        self.hashes.iter().position(|h| z.contains(&h.apply(t)))
    }
}

/// Arthur's random message: `l` hashes and `l²` targets.
pub fn arthur_challenge<R: Rng + ?Sized>(params: &GameParameters, rng: &mut R) -> Challenge {
    let hashes = (0..params.l)
        .map(|_| HashFunction::random(params.universe_bits(), params.p, rng))
        .collect();
    let mask = low_mask(params.p);
    let targets = (0..params.target_count()).map(|_| rng.gen::<u64>() & mask).collect();
    Challenge { hashes, targets }
}

/// Membership in the base set `S` of `n`-bit strings.
pub trait Membership {
    fn n(&self) -> u32;
    fn contains(&self, r: u64) -> bool;
}

/// An explicitly planted set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedSet {
    n: u32,
    members: BTreeSet<u64>,
}

impl PlantedSet {
    pub fn new(n: u32, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let members: BTreeSet<u64> = members.into_iter().collect();
        if let Some(&m) = members.iter().find(|&&m| m > low_mask(n)) {
            return Err(Error::InvalidParameter(format!("member {m} does not fit in {n} bits")));
        }
        Ok(Self { n, members })
    }

    /// All `r` with `r & mask == value`.
    pub fn from_mask(n: u32, mask: u64, value: u64) -> Result<Self> {
        if n > MAX_UNIVERSE_BITS {
            return Err(Error::SearchCap {
                bits: n,
                cap: MAX_UNIVERSE_BITS,
            });
        }
        Self::new(n, (0..1u64 << n).filter(|r| r & mask == value))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl Membership for PlantedSet {
    fn n(&self) -> u32 {
        self.n
    }

    fn contains(&self, r: u64) -> bool {
        self.members.contains(&r)
    }
}

/// File form of a planted set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Members { n: u32, members: Vec<u64> },
    Mask { n: u32, mask: u64, value: u64 },
}

impl SetSpec {
    pub fn build(&self) -> Result<PlantedSet> {
        match self {
            SetSpec::Members { n, members } => PlantedSet::new(*n, members.iter().copied()),
            SetSpec::Mask { n, mask, value } => PlantedSet::from_mask(*n, *mask, *value),
        }
    }
}

/// `r` is a member iff the coin map sends it to an accepted outcome.
#[derive(Clone, Debug)]
pub struct SimulationMembership {
    spec: SimulationSpec,
    accept: Vec<bool>,
}

impl SimulationMembership {
    pub fn new(spec: SimulationSpec, accept: Vec<bool>) -> Result<Self> {
        if accept.len() != spec.counts().len() {
            return Err(Error::InvalidParameter(format!(
                "{} acceptance flags for {} outcomes",
                accept.len(),
                spec.counts().len()
            )));
        }
        Ok(Self { spec, accept })
    }

    pub fn spec(&self) -> &SimulationSpec {
        &self.spec
    }
}

impl Membership for SimulationMembership {
    fn n(&self) -> u32 {
        self.spec.coin_width()
    }

    fn contains(&self, r: u64) -> bool {
        self.accept[self.spec.output(r)]
    }
}

/// Membership for a coin map over the joint outcome `(y, outputs)` of a
/// flattened circuit, `y` being the `guess.len()` high bits: `r` is a member
/// iff `y == guess` and output bit `decision` is 1.
pub fn membership_from_simulation(
    spec: SimulationSpec,
    guess: &BitString,
    output_bits: usize,
    decision: usize,
) -> Result<SimulationMembership> {
    let k = guess.len();
    if decision >= output_bits || spec.counts().len() != 1 << (k + output_bits) {
        return Err(Error::InvalidParameter(format!(
            "decision bit {decision} of {output_bits} outputs with {k} guess bits over {} outcomes",
            spec.counts().len()
        )));
    }
    let g = guess.to_index();
    let accept = (0..spec.counts().len())
        .map(|b| b >> output_bits == g && (b >> (output_bits - 1 - decision)) & 1 == 1)
        .collect();
    SimulationMembership::new(spec, accept)
}

/// The base set together with its `u`-fold product.
pub struct WitnessSet<'a> {
    base: &'a dyn Membership,
    u: u32,
    members: Vec<u64>,
}

impl<'a> WitnessSet<'a> {
    /// Enumerates the base set once, by running the predicate on every
    /// `n`-bit string.
    pub fn new(base: &'a dyn Membership, u: u32) -> Result<Self> {
        let bits = base.n() * u;
        if bits > MAX_UNIVERSE_BITS || u == 0 {
            return Err(Error::SearchCap {
                bits,
                cap: MAX_UNIVERSE_BITS,
            });
        }
        let members = (0..1u64 << base.n()).filter(|&r| base.contains(r)).collect();
        Ok(Self { base, u, members })
    }

    pub fn n(&self) -> u32 {
        self.base.n()
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    /// `|S|`.
    pub fn base_size(&self) -> usize {
        self.members.len()
    }

    /// `|S'| = |S|^u`.
    pub fn product_size(&self) -> f64 {
        (self.members.len() as f64).powi(self.u as i32)
    }

    /// Block `0` of `t` is its most significant `n` bits.
    pub fn blocks(&self, t: u64) -> Vec<u64> {
        let n = self.n();
        (0..self.u)
            .rev()
            .map(|j| (t >> (j * n)) & low_mask(n))
            .collect()
    }

    /// Membership in the product set, evaluated block by block.
    pub fn contains(&self, t: u64) -> bool {
        t >> (self.n() * self.u) == 0 && self.blocks(t).into_iter().all(|b| self.base.contains(b))
    }

    /// Product-set members in increasing order.
    fn product(&self) -> impl Iterator<Item = u64> + '_ {
        let (u, n, m) = (self.u as usize, self.n(), self.members.len());
        let total = if m == 0 { 0 } else { m.pow(u as u32) };
        (0..total).map(move |mut idx| {
            let mut t = 0u64;
            let mut digits = vec![0usize; u];
            for d in digits.iter_mut().rev() {
                *d = idx % m;
                idx /= m;
            }
            for d in digits {
                t = (t << n) | self.members[d];
            }
            t
        })
    }
}

/// Exhaustive Merlin: the smallest `t` in the product set with a hash hit.
pub fn merlin_respond(ws: &WitnessSet<'_>, challenge: &Challenge) -> Option<u64> {
    let z: HashSet<u64> = challenge.targets.iter().copied().collect();
    ws.product().find(|&t| challenge.hit_in(&z, t).is_some())
}

/// Accepts iff `t` is in the product set and some hash maps it into the
/// targets.
pub fn arthur_verify(ws: &WitnessSet<'_>, challenge: &Challenge, t: u64) -> bool {
    ws.contains(t) && challenge.hit(t).is_some()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameTranscript {
    pub hash_count: usize,
    pub target_count: usize,
    /// Merlin's answer as a `u·n`-bit string.
    pub witness: Option<BitString>,
    pub hash_index: Option<usize>,
    pub accept: bool,
}

pub fn run_game<R: Rng + ?Sized>(ws: &WitnessSet<'_>, params: &GameParameters, rng: &mut R) -> Result<GameTranscript> {
    if ws.n() != params.n || ws.u() != params.u {
        return Err(Error::InvalidParameter(format!(
            "witness set over {}x{} bits, game over {}x{}",
            ws.u(),
            ws.n(),
            params.u,
            params.n
        )));
    }
    let challenge = arthur_challenge(params, rng);
    let witness = merlin_respond(ws, &challenge);
    let accept = witness.is_some_and(|t| arthur_verify(ws, &challenge, t));
    Ok(GameTranscript {
        hash_count: challenge.hashes.len(),
        target_count: challenge.targets.len(),
        witness: witness.map(|t| BitString::from_index(t as usize, params.universe_bits() as usize)),
        hash_index: witness.and_then(|t| challenge.hit(t)),
        accept,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Big,
    Small,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub trials: u64,
    pub accepted: u64,
    pub acceptance: f64,
    pub threshold: f64,
    pub completeness_bound: f64,
    pub soundness_bound: f64,
    pub soundness_vacuous: bool,
    pub verdict: Verdict,
    /// Per-trial transcripts in trial order.
    #[serde(skip)]
    pub transcripts: Vec<GameTranscript>,
}

/// Plays `trials` independent rounds, trial `i` drawing its challenge from
/// [`trial_rng`]`(seed, i)`, and compares the acceptance rate with
/// [`GameParameters::threshold`].
pub fn decide(ws: &WitnessSet<'_>, params: &GameParameters, trials: u64, seed: u64) -> Result<Decision> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is needed".into()));
    }
    let transcripts = (0..trials)
        .map(|i| run_game(ws, params, &mut trial_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let accepted = transcripts.iter().filter(|t| t.accept).count() as u64;
    let acceptance = accepted as f64 / trials as f64;
    let threshold = params.threshold();
    Ok(Decision {
        trials,
        accepted,
        acceptance,
        threshold,
        completeness_bound: params.completeness_bound(),
        soundness_bound: params.soundness_bound(),
        soundness_vacuous: params.soundness_vacuous(),
        verdict: if acceptance > threshold { Verdict::Big } else { Verdict::Small },
        transcripts,
    })
}
