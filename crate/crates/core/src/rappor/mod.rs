//! RAPPOR client pipeline and its privacy calculators.
//!
//! A value is hashed into a Bloom filter `B`, passed through the permanent
//! randomized response (PRR, flip mass `f`) to get the memoized `B'`, and
//! each report `S` is a fresh instantaneous randomized response (IRR,
//! `P(S_i = 1)` is `q` when `B'_i = 1` and `p` otherwise).
//!
//! All logarithms are natural.

mod bloom;
mod estimate;
mod response;
mod wire;

pub use bloom::{bloom_check, bloom_encode, bloom_encode_all, hash_indices, BloomFilter};
pub use estimate::{estimate_counts, simulate, Estimate, Simulation};
pub use response::{irr, make_report, prr, PermanentResponse, Report};
pub use wire::ReportEnvelope;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RapporError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("outside the formula's domain: {0}")]
    DomainError(String),
    #[error("report has {found} bits, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("q* equals p*, reports carry no signal to invert")]
    DegenerateParams,
    #[error("no reports to aggregate")]
    NoReports,
    #[error("malformed report encoding: {0}")]
    BadEncoding(String),
    #[error("report was produced under params {found}, expected {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("invalid value distribution: {0}")]
    BadDistribution(String),
}

/// Filter geometry, hash keying and the three randomization probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct RapporParams {
    /// Filter size in bits.
    pub k: usize,
    /// Number of hash functions.
    pub h: usize,
    /// PRR flip mass.
    pub f: f64,
    /// `P(S_i = 1 | B'_i = 0)`.
    pub p: f64,
    /// `P(S_i = 1 | B'_i = 1)`.
    pub q: f64,
    pub hash_seed: u64,
}

#[derive(Deserialize)]
struct RawParams {
    k: usize,
    h: usize,
    f: f64,
    p: f64,
    q: f64,
    #[serde(default)]
    hash_seed: u64,
}

impl TryFrom<RawParams> for RapporParams {
    type Error = RapporError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        RapporParams::new(raw.k, raw.h, raw.f, raw.p, raw.q, raw.hash_seed)
    }
}

/// Marginal report-bit probabilities given the underlying Bloom bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Marginals {
    /// `P(S_i = 1 | B_i = 1)`
    pub q_star: f64,
    /// `P(S_i = 1 | B_i = 0)`
    pub p_star: f64,
}

fn probability(name: &str, x: f64) -> Result<(), RapporError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(RapporError::InvalidParams(format!(
            "{name} must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

impl RapporParams {
    pub fn new(
        k: usize,
        h: usize,
        f: f64,
        p: f64,
        q: f64,
        hash_seed: u64,
    ) -> Result<Self, RapporError> {
        if k == 0 {
            return Err(RapporError::InvalidParams(
                "filter size k must be at least 1".into(),
            ));
        }
        if h == 0 || h > k {
            return Err(RapporError::InvalidParams(format!(
                "hash count h must satisfy 1 <= h <= k, got h={h}, k={k}"
            )));
        }
        probability("f", f)?;
        probability("p", p)?;
        probability("q", q)?;
        Ok(Self {
            k,
            h,
            f,
            p,
            q,
            hash_seed,
        })
    }

    /// `h = 2, f = 0.5, q = 0.75, p = 0.5` on a `k`-bit filter.
    pub fn worked_example(k: usize, hash_seed: u64) -> Self {
        Self::new(k, 2, 0.5, 0.5, 0.75, hash_seed).expect("valid parameters")
    }

    /// Report bits pass through unchanged: `f = 0, q = 1, p = 0`.
    pub fn noiseless(k: usize, h: usize, hash_seed: u64) -> Result<Self, RapporError> {
        Self::new(k, h, 0.0, 0.0, 1.0, hash_seed)
    }

    /// Short fingerprint identifying these exact parameters.
    pub fn digest(&self) -> String {
        hex::encode(&self.digest_bytes()[..8])
    }

    pub(crate) fn digest_bytes(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(b"privkit/params/v1");
        hasher.update((self.k as u64).to_le_bytes());
        hasher.update((self.h as u64).to_le_bytes());
        for x in [self.f, self.p, self.q] {
            hasher.update(x.to_bits().to_le_bytes());
        }
        hasher.update(self.hash_seed.to_le_bytes());
        hasher.finalize().into()
    }
}

/// Privacy bound of the permanent response: `2h ln((1 - f/2) / (f/2))`.
pub fn epsilon_infinity(params: &RapporParams) -> Result<f64, RapporError> {
    let f = params.f;
    if !(f > 0.0 && f < 1.0) {
        return Err(RapporError::DomainError(format!(
            "epsilon_infinity needs 0 < f < 1, got f={f}"
        )));
    }
    let half = f / 2.0;
    Ok(2.0 * params.h as f64 * ((1.0 - half) / half).ln())
}

/// `q* = f(p+q)/2 + (1-f)q` and `p* = f(p+q)/2 + (1-f)p`.
pub fn report_marginals(params: &RapporParams) -> Marginals {
    let RapporParams { f, p, q, .. } = *params;
    let shared = 0.5 * f * (p + q);
    Marginals {
        q_star: shared + (1.0 - f) * q,
        p_star: shared + (1.0 - f) * p,
    }
}

/// Privacy bound of a single report: `h ln(q*(1-p*) / (p*(1-q*)))`.
pub fn epsilon_one(params: &RapporParams) -> Result<f64, RapporError> {
    let Marginals { q_star, p_star } = report_marginals(params);
    for (name, x) in [("q*", q_star), ("p*", p_star)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(RapporError::DomainError(format!(
                "epsilon_one needs 0 < {name} < 1, got {x}"
            )));
        }
    }
    if q_star == p_star {
        return Ok(0.0);
    }
    let ratio = q_star * (1.0 - p_star) / (p_star * (1.0 - q_star));
    Ok(params.h as f64 * ratio.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(h: usize, f: f64, p: f64, q: f64) -> RapporParams {
        RapporParams::new(16, h, f, p, q, 0).unwrap()
    }

    #[test]
    fn worked_epsilon_infinity() {
        let eps = epsilon_infinity(&params(2, 0.5, 0.5, 0.75)).unwrap();
        assert!((eps - 4.0 * 3f64.ln()).abs() < 1e-12);
        assert!((eps - 4.3945).abs() < 1e-3);

        let eps = epsilon_infinity(&params(1, 2.0 / 3.0, 0.5, 0.75)).unwrap();
        assert!((eps - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((eps - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn epsilon_infinity_domain() {
        for f in [0.0, 1.0] {
            assert!(matches!(
                epsilon_infinity(&params(2, f, 0.5, 0.75)),
                Err(RapporError::DomainError(_))
            ));
        }
    }

    #[test]
    fn report_marginal_values() {
        let m = report_marginals(&params(2, 0.5, 0.5, 0.75));
        assert!((m.q_star - 0.6875).abs() < 1e-15);
        assert!((m.p_star - 0.5625).abs() < 1e-15);

        let m = report_marginals(&params(2, 0.0, 0.25, 0.75));
        assert_eq!((m.q_star, m.p_star), (0.75, 0.25));

        let m = report_marginals(&params(2, 1.0, 0.25, 0.75));
        assert_eq!(m.q_star, 0.5);
        assert_eq!(m.p_star, 0.5);
    }

    #[test]
    fn epsilon_one_values() {
        let eps = epsilon_one(&params(1, 0.0, 0.25, 0.75)).unwrap();
        assert!((eps - 9f64.ln()).abs() < 1e-12);

        let eps = epsilon_one(&params(2, 0.5, 0.5, 0.75)).unwrap();
        let expected = 2.0 * (0.6875f64 * 0.4375 / (0.5625 * 0.3125)).ln();
        assert!((eps - expected).abs() < 1e-12);
        assert!((eps - 1.0743).abs() < 1e-4);

        assert_eq!(epsilon_one(&params(2, 0.3, 0.4, 0.4)).unwrap(), 0.0);
        assert!(matches!(
            epsilon_one(&params(2, 0.0, 0.0, 1.0)),
            Err(RapporError::DomainError(_))
        ));
    }

    #[test]
    fn epsilons_decrease_with_flip_mass() {
        let mut last = (f64::INFINITY, f64::INFINITY);
        for step in 1..100 {
            let f = step as f64 / 100.0;
            let p = params(2, f, 0.5, 0.75);
            let cur = (epsilon_infinity(&p).unwrap(), epsilon_one(&p).unwrap());
            assert!(cur.0 < last.0 && cur.1 < last.1, "f={f}");
            last = cur;
        }
    }

    #[test]
    fn param_validation() {
        assert!(RapporParams::new(0, 1, 0.5, 0.5, 0.75, 0).is_err());
        assert!(RapporParams::new(4, 0, 0.5, 0.5, 0.75, 0).is_err());
        assert!(RapporParams::new(4, 5, 0.5, 0.5, 0.75, 0).is_err());
        assert!(RapporParams::new(4, 2, 1.5, 0.5, 0.75, 0).is_err());
        assert!(RapporParams::new(4, 2, 0.5, -0.1, 0.75, 0).is_err());
        assert!(RapporParams::new(4, 2, 0.5, 0.5, f64::NAN, 0).is_err());

        let parsed: RapporParams =
            serde_json::from_str(r#"{"k":12,"h":2,"f":0.5,"p":0.5,"q":0.75}"#).unwrap();
        assert_eq!(parsed, RapporParams::worked_example(12, 0));
        assert!(
            serde_json::from_str::<RapporParams>(r#"{"k":1,"h":2,"f":0.5,"p":0.5,"q":0.75}"#)
                .is_err()
        );
    }

    #[test]
    fn digest_distinguishes_params() {
        let a = RapporParams::worked_example(12, 0);
        let b = RapporParams::worked_example(12, 1);
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }
}
