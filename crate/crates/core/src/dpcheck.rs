//! Exact ε for small randomized mechanisms.
//!
//! A mechanism's output distribution is enumerated over all `2^k` bit
//! patterns and the tight ε is the largest absolute log-ratio between two
//! distributions at any single outcome. For discrete outputs this equals the
//! bound over all outcome subsets.

use rayon::prelude::*;
use thiserror::Error;

use crate::rappor::{report_marginals, BloomFilter, RapporParams};

/// Largest filter the enumeration accepts.
pub const MAX_BITS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum DpError {
    #[error("filter has {0} bits, enumeration supports at most {MAX_BITS}")]
    FilterTooLarge(usize),
    #[error("outcome spaces differ: {0} bits vs {1} bits")]
    SpaceMismatch(usize, usize),
}

/// Probabilities of every `k`-bit outcome, stored as natural logs.
///
/// Outcome index `o` encodes bit `i` of the pattern as bit `i` of `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismDistribution {
    bits: usize,
    log_probs: Vec<f64>,
}

impl MechanismDistribution {
    /// Product distribution where bit `i` is 1 with probability `p_one[i]`.
    pub fn independent_bits(p_one: &[f64]) -> Result<Self, DpError> {
        if p_one.len() > MAX_BITS {
            return Err(DpError::FilterTooLarge(p_one.len()));
        }
        let mut log_probs = vec![0.0];
        for &p in p_one {
            let (ln_one, ln_zero) = (p.ln(), (1.0 - p).ln());
            let mut next = Vec::with_capacity(log_probs.len() * 2);
            next.extend(log_probs.iter().map(|lp| lp + ln_zero));
            next.extend(log_probs.iter().map(|lp| lp + ln_one));
            // Pattern index: previously placed bits are the low bits, this
            // bit is the new high bit.
            log_probs = next;
        }
        Ok(Self {
            bits: p_one.len(),
            log_probs,
        })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn outcomes(&self) -> usize {
        self.log_probs.len()
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.log_probs[outcome].exp()
    }

    pub fn ln_prob(&self, outcome: usize) -> f64 {
        self.log_probs[outcome]
    }

    pub fn total(&self) -> f64 {
        self.log_probs.iter().map(|lp| lp.exp()).sum()
    }
}

fn check_size(bloom: &BloomFilter) -> Result<(), DpError> {
    if bloom.len() > MAX_BITS {
        return Err(DpError::FilterTooLarge(bloom.len()));
    }
    Ok(())
}

/// Exact distribution of `B'` given `B`: bit `i` is 1 with probability
/// `f/2 + (1-f) B_i`.
pub fn prr_distribution(
    bloom: &BloomFilter,
    params: &RapporParams,
) -> Result<MechanismDistribution, DpError> {
    check_size(bloom)?;
    let half = params.f / 2.0;
    let p_one: Vec<f64> = bloom
        .bits()
        .iter()
        .map(|&b| half + if b { 1.0 - params.f } else { 0.0 })
        .collect();
    MechanismDistribution::independent_bits(&p_one)
}

/// Exact distribution of a report `S` given `B`, marginalizing `B'`: bit `i`
/// is 1 with probability `q*` when `B_i` is set and `p*` otherwise.
pub fn report_distribution(
    bloom: &BloomFilter,
    params: &RapporParams,
) -> Result<MechanismDistribution, DpError> {
    check_size(bloom)?;
    let m = report_marginals(params);
    let p_one: Vec<f64> = bloom
        .bits()
        .iter()
        .map(|&b| if b { m.q_star } else { m.p_star })
        .collect();
    MechanismDistribution::independent_bits(&p_one)
}

/// `max_o |ln(d1(o) / d2(o))|` over outcomes either side can produce.
///
/// Returns `f64::INFINITY` when one side gives an outcome zero probability
/// and the other does not.
pub fn exact_epsilon(
    d1: &MechanismDistribution,
    d2: &MechanismDistribution,
) -> Result<f64, DpError> {
    if d1.bits != d2.bits {
        return Err(DpError::SpaceMismatch(d1.bits, d2.bits));
    }
    let eps = d1
        .log_probs
        .par_iter()
        .zip(&d2.log_probs)
        .map(
            |(&a, &b)| match (a == f64::NEG_INFINITY, b == f64::NEG_INFINITY) {
                (true, true) => 0.0,
                (true, false) | (false, true) => f64::INFINITY,
                (false, false) => (a - b).abs(),
            },
        )
        .reduce(|| 0.0, f64::max);
    Ok(eps)
}
