//! Support / certainty association rules.
//!
//! Supports are kept as integer counts. Threshold tests compare
//! `count * denominator >= numerator * total` so that values sitting exactly
//! on a threshold such as 0.35 are classified the same way every time.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Dataset, Value};

pub const DEFAULT_MIN_SUPPORT: f64 = 0.35;
pub const DEFAULT_MIN_CERTAINTY: f64 = 0.60;

#[derive(Debug, Error, PartialEq)]
pub enum AssocError {
    #[error("item `{0}` is not in the item universe")]
    UnknownItem(String),
    #[error("antecedent and consequent share item `{0}`")]
    DisjointnessViolation(String),
    #[error("antecedent never occurs, certainty is undefined")]
    ZeroSupportAntecedent,
    #[error("threshold {0} is outside (0, 1]")]
    BadThreshold(f64),
    #[error("max itemset size must be at least 2, got {0}")]
    BadMaxItemset(usize),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
}

pub type ItemSet = BTreeSet<String>;

/// Transactions over a fixed item universe. Items are interned to indices in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionSet {
    items: Vec<String>,
    transactions: Vec<Vec<usize>>,
}

impl TransactionSet {
    /// Universe is the union of all transactions.
    pub fn new<I, T, S>(transactions: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let raw: Vec<BTreeSet<String>> = transactions
            .into_iter()
            .map(|t| t.into_iter().map(Into::into).collect())
            .collect();
        let universe: BTreeSet<String> = raw.iter().flatten().cloned().collect();
        Self::with_universe(universe, raw).expect("universe covers all items")
    }

    /// Explicit universe, which may contain items no transaction holds.
    pub fn with_universe(
        universe: BTreeSet<String>,
        transactions: Vec<BTreeSet<String>>,
    ) -> Result<Self, AssocError> {
        let items: Vec<String> = universe.into_iter().collect();
        let lookup: HashMap<&str, usize> = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let transactions = transactions
            .iter()
            .map(|t| {
                t.iter()
                    .map(|item| {
                        lookup
                            .get(item.as_str())
                            .copied()
                            .ok_or_else(|| AssocError::UnknownItem(item.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            items,
            transactions,
        })
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    fn encode<'a>(
        &self,
        itemset: impl IntoIterator<Item = &'a str>,
    ) -> Result<Vec<usize>, AssocError> {
        let mut ids = itemset
            .into_iter()
            .map(|item| {
                self.items
                    .binary_search_by(|probe| probe.as_str().cmp(item))
                    .map_err(|_| AssocError::UnknownItem(item.to_owned()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    fn decode(&self, ids: &[usize]) -> ItemSet {
        ids.iter().map(|&i| self.items[i].clone()).collect()
    }

    /// Number of transactions containing every item of `ids` (sorted).
    fn count(&self, ids: &[usize]) -> usize {
        self.transactions
            .iter()
            .filter(|t| ids.iter().all(|i| t.binary_search(i).is_ok()))
            .count()
    }

    pub fn support_count<'a>(
        &self,
        itemset: impl IntoIterator<Item = &'a str>,
    ) -> Result<usize, AssocError> {
        Ok(self.count(&self.encode(itemset)?))
    }

    /// Builds one transaction per record from the named columns, each item
    /// labelled `attribute=value`. Suppressed cells contribute nothing.
    pub fn from_dataset(dataset: &Dataset, columns: &[&str]) -> Result<Self, AssocError> {
        let indices = columns
            .iter()
            .map(|&c| {
                dataset
                    .schema()
                    .index_of(c)
                    .ok_or_else(|| AssocError::UnknownAttribute(c.to_owned()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let transactions = dataset.records().iter().map(|record| {
            columns
                .iter()
                .zip(&indices)
                .filter(|(_, &i)| record[i] != Value::Suppressed)
                .map(|(name, &i)| format!("{name}={}", record[i]))
                .collect::<Vec<_>>()
        });
        Ok(Self::new(transactions))
    }
}

/// Fraction of transactions containing every item. The empty itemset has
/// support 1; an empty transaction set gives 0 for everything else.
pub fn support<'a>(
    transactions: &TransactionSet,
    itemset: impl IntoIterator<Item = &'a str>,
) -> Result<f64, AssocError> {
    let ids = transactions.encode(itemset)?;
    if ids.is_empty() {
        return Ok(1.0);
    }
    if transactions.is_empty() {
        return Ok(0.0);
    }
    Ok(transactions.count(&ids) as f64 / transactions.len() as f64)
}

/// `support(A ∪ B) / support(A)`.
pub fn certainty<'a>(
    transactions: &TransactionSet,
    antecedent: impl IntoIterator<Item = &'a str>,
    consequent: impl IntoIterator<Item = &'a str>,
) -> Result<f64, AssocError> {
    let a = transactions.encode(antecedent)?;
    let b = transactions.encode(consequent)?;
    if let Some(&shared) = a.iter().find(|i| b.binary_search(i).is_ok()) {
        return Err(AssocError::DisjointnessViolation(
            transactions.items[shared].clone(),
        ));
    }
    let count_a = transactions.count(&a);
    if count_a == 0 {
        return Err(AssocError::ZeroSupportAntecedent);
    }
    let mut union = a;
    union.extend(b);
    union.sort_unstable();
    Ok(transactions.count(&union) as f64 / count_a as f64)
}

/// A threshold held as parts per million.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Threshold(u64);

impl Threshold {
    const SCALE: u64 = 1_000_000;

    fn new(t: f64) -> Result<Self, AssocError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(AssocError::BadThreshold(t));
        }
        Ok(Self((t * Self::SCALE as f64).round() as u64))
    }

    /// `num / den >= self`
    fn met_by(self, num: usize, den: usize) -> bool {
        num as u128 * Self::SCALE as u128 >= self.0 as u128 * den as u128
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rule {
    pub antecedent: ItemSet,
    pub consequent: ItemSet,
    pub support: f64,
    pub certainty: f64,
    /// Transactions containing `A ∪ B`.
    pub support_count: usize,
    /// Transactions containing `A`.
    pub antecedent_count: usize,
}

impl Rule {
    /// Certainty descending, support descending, then antecedent and
    /// consequent lexicographically. Ratios compare exactly.
    pub fn ranking(&self, other: &Self) -> Ordering {
        let lhs = self.support_count as u128 * other.antecedent_count as u128;
        let rhs = other.support_count as u128 * self.antecedent_count as u128;
        rhs.cmp(&lhs)
            .then(other.support_count.cmp(&self.support_count))
            .then_with(|| self.antecedent.iter().cmp(other.antecedent.iter()))
            .then_with(|| self.consequent.iter().cmp(other.consequent.iter()))
    }
}

/// Frequent itemsets by levelwise candidate generation, each with its count.
fn frequent_itemsets(
    transactions: &TransactionSet,
    min_support: Threshold,
    max_itemset: usize,
) -> BTreeMap<Vec<usize>, usize> {
    let n = transactions.len();
    let mut frequent = BTreeMap::new();
    let mut level: Vec<Vec<usize>> = (0..transactions.items.len())
        .map(|i| vec![i])
        .filter(|s| min_support.met_by(transactions.count(s), n))
        .collect();
    let mut size = 1;
    while !level.is_empty() {
        for set in &level {
            frequent.insert(set.clone(), transactions.count(set));
        }
        if size == max_itemset {
            break;
        }
        // Join sets sharing all but the last item, prune by downward closure.
        let mut next = Vec::new();
        for (i, a) in level.iter().enumerate() {
            for b in &level[i + 1..] {
                if a[..size - 1] != b[..size - 1] {
                    break;
                }
                let mut candidate = a.clone();
                candidate.push(b[size - 1]);
                let closed = (0..candidate.len()).all(|skip| {
                    let mut subset = candidate.clone();
                    subset.remove(skip);
                    frequent.contains_key(&subset)
                });
                if closed && min_support.met_by(transactions.count(&candidate), n) {
                    next.push(candidate);
                }
            }
        }
        level = next;
        size += 1;
    }
    frequent
}

/// All rules `A → B` with `|A ∪ B| <= max_itemset`, support of `A ∪ B` at
/// least `min_support` and certainty at least `min_certainty`.
pub fn solid_rules(
    transactions: &TransactionSet,
    min_support: f64,
    min_certainty: f64,
    max_itemset: usize,
) -> Result<Vec<Rule>, AssocError> {
    let min_support = Threshold::new(min_support)?;
    let min_certainty = Threshold::new(min_certainty)?;
    if max_itemset < 2 {
        return Err(AssocError::BadMaxItemset(max_itemset));
    }
    let n = transactions.len();
    if n == 0 {
        return Ok(Vec::new());
    }

    let frequent = frequent_itemsets(transactions, min_support, max_itemset);
    let mut rules = Vec::new();
    for (set, &count) in frequent.iter().filter(|(s, _)| s.len() >= 2) {
        let width = set.len();
        // every non-empty proper subset as antecedent
        for mask in 1..(1u64 << width) - 1 {
            let (a, b): (Vec<usize>, Vec<usize>) = {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (bit, &item) in set.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        a.push(item);
                    } else {
                        b.push(item);
                    }
                }
                (a, b)
            };
            let antecedent_count = frequent[&a];
            if min_certainty.met_by(count, antecedent_count) {
                rules.push(Rule {
                    antecedent: transactions.decode(&a),
                    consequent: transactions.decode(&b),
                    support: count as f64 / n as f64,
                    certainty: count as f64 / antecedent_count as f64,
                    support_count: count,
                    antecedent_count,
                });
            }
        }
    }
    rules.sort_by(Rule::ranking);
    Ok(rules)
}
