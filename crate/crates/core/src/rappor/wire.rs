use serde::{Deserialize, Serialize};

use super::{BloomFilter, RapporError, RapporParams, Report};

impl BloomFilter {
    /// Lowercase hex of `ceil(k/8)` bytes; bit `i` is bit `i % 8` of byte `i / 8`.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for i in self.set_indices() {
            bytes[i / 8] |= 1 << (i % 8);
        }
        hex::encode(bytes)
    }

    /// Inverse of [`BloomFilter::to_hex`] for a `k`-bit filter. Padding bits
    /// past `k` must be zero.
    pub fn from_hex(text: &str, k: usize) -> Result<Self, RapporError> {
        let bytes =
            hex::decode(text.trim()).map_err(|e| RapporError::BadEncoding(e.to_string()))?;
        if bytes.len() != k.div_ceil(8) {
            return Err(RapporError::LengthMismatch {
                expected: k,
                found: bytes.len() * 8,
            });
        }
        let bit = |i: usize| bytes[i / 8] >> (i % 8) & 1 == 1;
        if (k..bytes.len() * 8).any(bit) {
            return Err(RapporError::BadEncoding(format!(
                "bits beyond position {k} are set"
            )));
        }
        Ok(Self::from_bits((0..k).map(bit).collect()))
    }
}

impl Report {
    pub fn to_hex(&self) -> String {
        self.bits.to_hex()
    }

    pub fn from_hex(text: &str, k: usize) -> Result<Self, RapporError> {
        BloomFilter::from_hex(text, k).map(|bits| Report { bits })
    }
}

/// A report tagged with the digest of the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub params_digest: String,
    pub report_hex: String,
}

impl ReportEnvelope {
    pub fn new(report: &Report, params: &RapporParams) -> Self {
        Self {
            params_digest: params.digest(),
            report_hex: report.to_hex(),
        }
    }

    pub fn open(&self, params: &RapporParams) -> Result<Report, RapporError> {
        let expected = params.digest();
        if self.params_digest != expected {
            return Err(RapporError::DigestMismatch {
                expected,
                found: self.params_digest.clone(),
            });
        }
        Report::from_hex(&self.report_hex, params.k)
    }
}
