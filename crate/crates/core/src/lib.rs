//! Privacy-preserving data toolkit.
//!
//! * [`dataset`]: role-annotated records, CSV I/O and the medical-record fixture.
//! * [`anonymize`]: suppression, generalization, noise, swapping, rank swapping,
//!   microaggregation, k-anonymity and l-diversity.
//! * [`rappor`]: Bloom encoding, permanent and instantaneous randomized
//!   response, privacy calculators and a frequency estimator.
//! * [`dpcheck`]: exact ε by enumerating small mechanisms' output distributions.
//! * [`smc`]: secret summation with polynomial shares over a prime field.
//! * [`assoc`]: support/certainty association rules.

pub mod anonymize;
pub mod assoc;
pub mod dataset;
pub mod dpcheck;
pub mod rappor;
pub mod smc;

pub use anonymize::AnonymizeError;
pub use assoc::{AssocError, Rule, TransactionSet};
pub use dataset::{Attribute, AttributeRole, Dataset, DatasetError, Kind, Schema, Value};
pub use dpcheck::{DpError, MechanismDistribution};
pub use rappor::{BloomFilter, RapporError, RapporParams, Report};
pub use smc::{FieldElement, SecretSumTranscript, SmcError};
