use std::collections::{HashMap, HashSet};

use super::{column_index, AnonymizeError};
use crate::dataset::{Dataset, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    /// Shared quasi-identifier values.
    pub key: Vec<Value>,
    /// Record indices in record order.
    pub members: Vec<usize>,
}

impl EquivalenceClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Disjoint cover of a dataset's records by equivalence classes.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Partition {
    pub classes: Vec<EquivalenceClass>,
}

impl Partition {
    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(EquivalenceClass::size).collect()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Member lists only, the shape [`super::aggregate_groups`] consumes.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.classes.iter().map(|c| c.members.clone()).collect()
    }
}

fn qi_indices(dataset: &Dataset, qi: &[&str]) -> Result<Vec<usize>, AnonymizeError> {
    if qi.is_empty() {
        return Err(AnonymizeError::EmptyQiList);
    }
    qi.iter().map(|name| column_index(dataset, name)).collect()
}

/// Groups records by exact equality of their quasi-identifier tuple.
///
/// Classes appear in order of their first member.
pub fn equivalence_classes(dataset: &Dataset, qi: &[&str]) -> Result<Partition, AnonymizeError> {
    let columns = qi_indices(dataset, qi)?;
    let mut lookup: HashMap<Vec<&Value>, usize> = HashMap::new();
    let mut classes: Vec<EquivalenceClass> = Vec::new();
    for (row, record) in dataset.records().iter().enumerate() {
        let key: Vec<&Value> = columns.iter().map(|&c| &record[c]).collect();
        match lookup.get(&key) {
            Some(&slot) => classes[slot].members.push(row),
            None => {
                lookup.insert(key.clone(), classes.len());
                classes.push(EquivalenceClass {
                    key: key.into_iter().cloned().collect(),
                    members: vec![row],
                });
            }
        }
    }
    Ok(Partition { classes })
}

/// Smallest equivalence-class size.
pub fn k_anonymity(dataset: &Dataset, qi: &[&str]) -> Result<usize, AnonymizeError> {
    if dataset.is_empty() {
        return Err(AnonymizeError::EmptyDataset);
    }
    let partition = equivalence_classes(dataset, qi)?;
    Ok(partition
        .sizes()
        .into_iter()
        .min()
        .expect("non-empty dataset"))
}

/// Smallest number of distinct sensitive values found in any equivalence
/// class.
pub fn l_diversity(
    dataset: &Dataset,
    qi: &[&str],
    sensitive: &str,
) -> Result<usize, AnonymizeError> {
    if dataset.is_empty() {
        return Err(AnonymizeError::EmptyDataset);
    }
    let column = column_index(dataset, sensitive)?;
    let partition = equivalence_classes(dataset, qi)?;
    let records = dataset.records();
    let l = partition
        .classes
        .iter()
        .map(|class| {
            class
                .members
                .iter()
                .map(|&m| &records[m][column])
                .collect::<HashSet<_>>()
                .len()
        })
        .min()
        .expect("non-empty dataset");
    Ok(l)
}
