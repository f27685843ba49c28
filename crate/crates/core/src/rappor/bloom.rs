use sha2::{Digest, Sha256};

use super::RapporParams;

/// Fixed-size bit vector; bit `i` is `bits[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BloomFilter {
    bits: Vec<bool>,
}

impl BloomFilter {
    pub fn empty(k: usize) -> Self {
        Self {
            bits: vec![false; k],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// A `k`-bit filter with exactly the given indices set.
    pub fn with_indices(k: usize, indices: &[usize]) -> Self {
        let mut filter = Self::empty(k);
        for &i in indices {
            filter.bits[i] = true;
        }
        filter
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize) {
        self.bits[i] = true;
    }

    pub fn set_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `'0'`/`'1'` per bit, index 0 first.
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::from_bits)
    }
}

fn hash64(hash_seed: u64, j: u32, v: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"privkit/bloom/v1");
    hasher.update(hash_seed.to_le_bytes());
    hasher.update(j.to_le_bytes());
    hasher.update(v.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Bit positions of `v` for hash functions `1..=h`, in hash order. May
/// contain repeats when two hashes collide.
pub fn hash_indices(v: &str, params: &RapporParams) -> Vec<usize> {
    (1..=params.h as u32)
        .map(|j| (hash64(params.hash_seed, j, v) % params.k as u64) as usize)
        .collect()
}

pub fn bloom_encode(v: &str, params: &RapporParams) -> BloomFilter {
    bloom_encode_all([v], params)
}

/// Inserts several values into one shared filter.
pub fn bloom_encode_all<'a>(
    values: impl IntoIterator<Item = &'a str>,
    params: &RapporParams,
) -> BloomFilter {
    let mut filter = BloomFilter::empty(params.k);
    for v in values {
        for i in hash_indices(v, params) {
            filter.set(i);
        }
    }
    filter
}

/// True when every hashed position of `v` is set. False positives are
/// possible, false negatives are not.
pub fn bloom_check(filter: &BloomFilter, v: &str, params: &RapporParams) -> bool {
    hash_indices(v, params).into_iter().all(|i| filter.get(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn illustration() -> RapporParams {
        RapporParams::worked_example(12, 0)
    }

    #[test]
    fn golden_indices() {
        // Pinned so a change to the hash family is caught; cross-checked
        // against an independent SHA-256 computation.
        let params = illustration();
        assert_eq!(hash_indices("chlamydia", &params), GOLDEN_CHLAMYDIA);
        assert_eq!(hash_indices("syphilis", &params), GOLDEN_SYPHILIS);
    }

    const GOLDEN_CHLAMYDIA: [usize; 2] = [9, 0];
    const GOLDEN_SYPHILIS: [usize; 2] = [5, 2];

    #[test]
    fn shared_filter_and_false_positive() {
        let params = illustration();
        let filter = bloom_encode_all(["chlamydia", "syphilis"], &params);
        assert!(bloom_check(&filter, "chlamydia", &params));
        assert!(bloom_check(&filter, "syphilis", &params));
        let mut expected = hash_indices("chlamydia", &params);
        expected.extend(hash_indices("syphilis", &params));
        expected.sort();
        expected.dedup();
        assert_eq!(filter.set_indices(), expected);

        // Some never-inserted value must collide on a 12-bit filter.
        let false_positive = (0..1000)
            .map(|i| format!("disease-{i}"))
            .find(|v| bloom_check(&filter, v, &params));
        assert!(false_positive.is_some());
    }

    #[test]
    fn single_bit_filter() {
        let params = RapporParams::new(1, 1, 0.5, 0.5, 0.75, 9).unwrap();
        for v in ["a", "b", "", "long value"] {
            assert_eq!(bloom_encode(v, &params).bits(), [true]);
        }
    }

    #[test]
    fn empty_filter_rejects_everything() {
        let params = illustration();
        let filter = BloomFilter::empty(12);
        assert!(!bloom_check(&filter, "chlamydia", &params));
        assert!(!bloom_check(&filter, "", &params));
    }

    #[test]
    fn encoding_is_deterministic_and_bounded() {
        let params = RapporParams::worked_example(64, 5);
        for i in 0..200 {
            let v = format!("value {i}");
            let a = bloom_encode(&v, &params);
            assert_eq!(a, bloom_encode(&v, &params));
            assert!((1..=params.h).contains(&a.count_ones()));
            assert!(bloom_check(&a, &v, &params));
        }
    }

    #[test]
    fn hash_seed_changes_indices() {
        let a = RapporParams::worked_example(1 << 20, 0);
        let b = RapporParams::worked_example(1 << 20, 1);
        assert_ne!(hash_indices("chlamydia", &a), hash_indices("chlamydia", &b));
    }

    #[test]
    fn bit_strings() {
        let f = BloomFilter::with_indices(5, &[0, 3]);
        assert_eq!(f.to_bit_string(), "10010");
        assert_eq!(BloomFilter::from_bit_string("10010"), Some(f));
        assert_eq!(BloomFilter::from_bit_string("10x"), None);
    }
}
