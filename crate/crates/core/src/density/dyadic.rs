//! Deterministic coin-to-outcome maps approximating a distribution.
//!
//! The `2^r` coin strings are cut into contiguous blocks, one per outcome in
//! index order, with block sizes apportioned by largest remainder (ties go
//! to the lower outcome index). The achieved accuracy is
//! `max_b |N(b)/2^r - p(b)| / p(b)` over outcomes with `p(b) > 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerances;

/// Largest coin width for which maps are built and checked exhaustively.
pub const MAX_COIN_WIDTH: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSpec {
    coin_width: u32,
    probabilities: Vec<f64>,
    counts: Vec<u64>,
    /// `ends[b]` is one past the last coin value mapped to `b`.
    ends: Vec<u64>,
    epsilon: f64,
}

impl SimulationSpec {
    pub fn coin_width(&self) -> u32 {
        self.coin_width
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `N(b)` for every outcome.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The outcome produced by coin string `coins` (its low `r` bits).
    pub fn output(&self, coins: u64) -> usize {
        let c = coins & ((1u64 << self.coin_width) - 1);
        self.ends.partition_point(|&e| e <= c)
    }

    /// Recounts `N(b)` by running every coin string through [`Self::output`]
    /// and returns the accuracy actually achieved.
    pub fn verify_exhaustive(&self) -> Result<f64> {
        if self.coin_width > MAX_COIN_WIDTH {
            return Err(Error::SearchCap {
                bits: self.coin_width,
                cap: MAX_COIN_WIDTH,
            });
        }
        let mut n = vec![0u64; self.probabilities.len()];
        for c in 0..1u64 << self.coin_width {
            n[self.output(c)] += 1;
        }
        Ok(relative_error(&n, &self.probabilities, self.coin_width))
    }
}

fn relative_error(counts: &[u64], probabilities: &[f64], r: u32) -> f64 {
    let total = (1u64 << r) as f64;
    counts
        .iter()
        .zip(probabilities)
        .filter(|(_, &p)| p > tolerances::ZERO_PROBABILITY)
        .map(|(&n, &p)| (n as f64 / total - p).abs() / p)
        .fold(0.0, f64::max)
}

/// Builds the coin map for `probabilities` with `r` coins. Probabilities
/// are renormalized; entries at or below
/// [`tolerances::ZERO_PROBABILITY`] are treated as zero.
pub fn dyadic_simulation(probabilities: &[f64], r: u32) -> Result<SimulationSpec> {
    if r == 0 || r > MAX_COIN_WIDTH {
        return Err(Error::InvalidParameter(format!(
            "coin width {r} outside 1..={MAX_COIN_WIDTH}"
        )));
    }
    let clean: Vec<f64> = probabilities
        .iter()
        .map(|&p| if p > tolerances::ZERO_PROBABILITY { p } else { 0.0 })
        .collect();
    let sum: f64 = clean.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::InvalidParameter("distribution has no mass".into()));
    }
    let p: Vec<f64> = clean.iter().map(|x| x / sum).collect();
    let total = 1u64 << r;
    let quotas: Vec<f64> = p.iter().map(|x| x * total as f64).collect();
    let mut counts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).filter(|&b| p[b] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &b in order.iter().take(total.saturating_sub(assigned) as usize) {
        counts[b] += 1;
    }
    if let Some(b) = (0..p.len()).find(|&b| p[b] > 0.0 && counts[b] == 0) {
        return Err(Error::CoinWidthTooSmall {
            outcome: b.to_string(),
            coin_width: r,
        });
    }
    let ends = counts
        .iter()
        .scan(0u64, |acc, &n| {
            *acc += n;
            Some(*acc)
        })
        .collect();
    let epsilon = relative_error(&counts, &p, r);
    Ok(SimulationSpec {
        coin_width: r,
        probabilities: p,
        counts,
        ends,
        epsilon,
    })
}

/// Doubles the coin width from 1 (capped at [`MAX_COIN_WIDTH`]) until the
/// achieved accuracy is below `target`.
pub fn auto_coin_width(probabilities: &[f64], target: f64) -> Result<SimulationSpec> {
    let mut r = 1;
    let mut last_err = None;
    loop {
        match dyadic_simulation(probabilities, r) {
            Ok(spec) if spec.epsilon() < target => return Ok(spec),
            Ok(_) => {}
            Err(e @ Error::CoinWidthTooSmall { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        if r == MAX_COIN_WIDTH {
            return Err(last_err.unwrap_or(Error::SearchCap {
                bits: r,
                cap: MAX_COIN_WIDTH,
            }));
        }
        r = (r * 2).min(MAX_COIN_WIDTH);
    }
}
