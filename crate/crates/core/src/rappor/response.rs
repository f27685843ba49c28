use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{bloom_encode, BloomFilter, RapporParams};

/// The memoized `B'` for one client and one value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermanentResponse {
    pub value: String,
    pub bits: BloomFilter,
}

/// A `k`-bit report as sent to the aggregator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Report {
    pub bits: BloomFilter,
}

impl Report {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Keys the PRR stream. Length prefixes keep `(secret, value)` pairs from
/// aliasing each other.
fn prr_seed(client_secret: &[u8], v: &str, params: &RapporParams) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"privkit/prr/v1");
    hasher.update((client_secret.len() as u64).to_le_bytes());
    hasher.update(client_secret);
    hasher.update((v.len() as u64).to_le_bytes());
    hasher.update(v.as_bytes());
    hasher.update(params.digest_bytes());
    hasher.finalize().into()
}

/// Permanent randomized response. Each bit becomes 1 with probability `f/2`,
/// 0 with probability `f/2`, and keeps `B_i` otherwise.
///
/// The randomness is derived from `(client_secret, v, params)`, so a client
/// re-deriving `B'` for the same value always gets the same bits.
pub fn prr(
    filter: &BloomFilter,
    client_secret: &[u8],
    v: &str,
    params: &RapporParams,
) -> PermanentResponse {
    let mut rng = ChaCha20Rng::from_seed(prr_seed(client_secret, v, params));
    let half = params.f / 2.0;
    let bits = filter
        .bits()
        .iter()
        .map(|&b| {
            let u: f64 = rng.random();
            if u < half {
                true
            } else if u < params.f {
                false
            } else {
                b
            }
        })
        .collect();
    PermanentResponse {
        value: v.to_owned(),
        bits: BloomFilter::from_bits(bits),
    }
}

/// Instantaneous randomized response with fresh randomness from `rng`.
pub fn irr<R: Rng + ?Sized>(
    perm: &PermanentResponse,
    params: &RapporParams,
    rng: &mut R,
) -> Report {
    let bits = perm
        .bits
        .bits()
        .iter()
        .map(|&b| {
            let threshold = if b { params.q } else { params.p };
            rng.random::<f64>() < threshold
        })
        .collect();
    Report {
        bits: BloomFilter::from_bits(bits),
    }
}

/// Encode, permanent response, instantaneous response.
pub fn make_report<R: Rng + ?Sized>(
    v: &str,
    client_secret: &[u8],
    params: &RapporParams,
    rng: &mut R,
) -> Report {
    let filter = bloom_encode(v, params);
    let perm = prr(&filter, client_secret, v, params);
    irr(&perm, params, rng)
}
