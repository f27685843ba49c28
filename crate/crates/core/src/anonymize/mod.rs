//! Statistical disclosure control transforms and the k-anonymity /
//! l-diversity metrics.
//!
//! Every transform takes a `&Dataset` and returns a new one. Randomized
//! transforms take the generator explicitly, so output is a function of
//! `(input, seed)`. Columns a transform does not target are copied verbatim.

mod generalize;
mod metrics;
mod microagg;
mod perturb;

pub use generalize::{generalize, suppress, GeneralizationRule, Strategy};
pub use metrics::{equivalence_classes, k_anonymity, l_diversity, EquivalenceClass, Partition};
pub use microagg::{
    aggregate_groups, mdav_groups, microaggregate_multivariate, microaggregate_univariate,
    univariate_groups,
};
pub use perturb::{add_noise, rank_swap, rank_swap_pairs, swap_values, NoiseSpec};

use thiserror::Error;

use crate::dataset::{Dataset, Kind};

#[derive(Debug, Error, PartialEq)]
pub enum AnonymizeError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attribute}` must be {expected}, found {found}")]
    KindMismatch {
        attribute: String,
        expected: Kind,
        found: String,
    },
    #[error("quasi-identifier list is empty")]
    EmptyQiList,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid noise spec: {0}")]
    InvalidSpec(String),
    #[error("invalid generalization rule for `{attribute}`: {reason}")]
    InvalidRule { attribute: String, reason: String },
    #[error("{requested} swaps requested but only {max} disjoint pairs exist")]
    TooManySwaps { requested: usize, max: usize },
    #[error("dataset has {actual} records, at least {required} required")]
    DatasetTooSmall { required: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integer overflow in `{0}`")]
    Overflow(String),
    #[error("groups must partition all {records} records exactly once")]
    BadGrouping { records: usize },
}

pub(crate) fn column_index(dataset: &Dataset, name: &str) -> Result<usize, AnonymizeError> {
    dataset
        .schema()
        .index_of(name)
        .ok_or_else(|| AnonymizeError::UnknownAttribute(name.to_owned()))
}

/// Column index plus the raw integers of that column. Fails on any cell that
/// is not a raw integer.
pub(crate) fn integer_column(
    dataset: &Dataset,
    name: &str,
) -> Result<(usize, Vec<i64>), AnonymizeError> {
    let index = column_index(dataset, name)?;
    let attr = &dataset.schema().attributes()[index];
    if attr.kind != Kind::Integer {
        return Err(AnonymizeError::KindMismatch {
            attribute: name.to_owned(),
            expected: Kind::Integer,
            found: attr.kind.to_string(),
        });
    }
    let values = dataset
        .records()
        .iter()
        .map(|r| {
            r[index]
                .as_integer()
                .ok_or_else(|| AnonymizeError::KindMismatch {
                    attribute: name.to_owned(),
                    expected: Kind::Integer,
                    found: r[index].form().to_owned(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((index, values))
}

/// Indices `0..n` ordered by `key`, ties kept in index order.
pub(crate) fn stable_rank_order(keys: &[i64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| keys[i]);
    order
}

/// `sum / n` rounded half away from zero.
pub(crate) fn rounded_mean(sum: i128, n: usize) -> i64 {
    debug_assert!(n > 0);
    let n = n as i128;
    let q = (2 * sum.abs() + n) / (2 * n);
    (if sum < 0 { -q } else { q }) as i64
}
