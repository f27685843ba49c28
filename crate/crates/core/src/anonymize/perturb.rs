use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{column_index, integer_column, stable_rank_order, AnonymizeError};
use crate::dataset::{Dataset, Value};

const SPEC_TOLERANCE: f64 = 1e-12;

/// Discrete zero-mean distribution over integer offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<i64, f64>", into = "BTreeMap<i64, f64>")]
pub struct NoiseSpec {
    deltas: Vec<i64>,
    probabilities: Vec<f64>,
}

impl NoiseSpec {
    pub fn new(entries: impl IntoIterator<Item = (i64, f64)>) -> Result<Self, AnonymizeError> {
        let map: BTreeMap<i64, f64> = entries.into_iter().collect();
        Self::try_from(map)
    }

    /// ±1 and ±2, each with probability 1/4.
    pub fn plus_minus_two() -> Self {
        Self::new([(-2, 0.25), (-1, 0.25), (1, 0.25), (2, 0.25)]).expect("valid spec")
    }

    /// Offsets with nonzero probability.
    pub fn support(&self) -> Vec<i64> {
        self.deltas
            .iter()
            .zip(&self.probabilities)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&d, _)| d)
            .collect()
    }

    pub fn variance(&self) -> f64 {
        self.deltas
            .iter()
            .zip(&self.probabilities)
            .map(|(&d, &p)| p * (d as f64).powi(2))
            .sum()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.probabilities).expect("validated weights")
    }
}

impl TryFrom<BTreeMap<i64, f64>> for NoiseSpec {
    type Error = AnonymizeError;

    fn try_from(map: BTreeMap<i64, f64>) -> Result<Self, Self::Error> {
        let invalid = |msg: String| Err(AnonymizeError::InvalidSpec(msg));
        if map.is_empty() {
            return invalid("no offsets given".into());
        }
        if let Some((d, p)) = map.iter().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return invalid(format!("offset {d} has invalid probability {p}"));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > SPEC_TOLERANCE {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        let mean: f64 = map.iter().map(|(&d, &p)| d as f64 * p).sum();
        if mean.abs() > SPEC_TOLERANCE {
            return invalid(format!("expected offset is {mean}, not 0"));
        }
        let (deltas, probabilities) = map.into_iter().unzip();
        Ok(Self {
            deltas,
            probabilities,
        })
    }
}

impl From<NoiseSpec> for BTreeMap<i64, f64> {
    fn from(spec: NoiseSpec) -> Self {
        spec.deltas.into_iter().zip(spec.probabilities).collect()
    }
}

/// Adds an independent draw from `spec` to every value of an integer column.
pub fn add_noise<R: Rng + ?Sized>(
    dataset: &Dataset,
    attribute: &str,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<Dataset, AnonymizeError> {
    let (index, values) = integer_column(dataset, attribute)?;
    let sampler = spec.sampler();
    let noisy = values
        .into_iter()
        .map(|x| {
            let delta = spec.deltas[sampler.sample(rng)];
            x.checked_add(delta)
                .map(Value::Integer)
                .ok_or_else(|| AnonymizeError::Overflow(attribute.to_owned()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(dataset.with_column(index, noisy))
}

/// Exchanges values between `n_swaps` disjoint, uniformly chosen record pairs.
pub fn swap_values<R: Rng + ?Sized>(
    dataset: &Dataset,
    attribute: &str,
    n_swaps: usize,
    rng: &mut R,
) -> Result<Dataset, AnonymizeError> {
    let index = column_index(dataset, attribute)?;
    let n = dataset.len();
    if n_swaps > n / 2 {
        return Err(AnonymizeError::TooManySwaps {
            requested: n_swaps,
            max: n / 2,
        });
    }
    let mut column = dataset.column(index);
    let chosen = index::sample(rng, n, 2 * n_swaps).into_vec();
    for pair in chosen.chunks_exact(2) {
        column.swap(pair[0], pair[1]);
    }
    Ok(dataset.with_column(index, column))
}

/// Pairs up ranks `0..n` for rank swapping.
///
/// Ranks are scanned in ascending order. Each rank `i` not yet paired picks a
/// partner uniformly among unpaired ranks in `i+1 ..= i+p`; when none is left
/// it stays put. Returned pairs are `(i, l)` with `i < l <= i + p`.
pub fn rank_swap_pairs<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut paired = vec![false; n];
    let mut pairs = Vec::new();
    let mut candidates = Vec::with_capacity(p);
    for i in 0..n {
        if paired[i] {
            continue;
        }
        candidates.clear();
        let last = i.saturating_add(p).min(n.saturating_sub(1));
        candidates.extend((i + 1..=last).filter(|&l| !paired[l]));
        if candidates.is_empty() {
            continue;
        }
        let l = candidates[rng.random_range(0..candidates.len())];
        paired[i] = true;
        paired[l] = true;
        pairs.push((i, l));
    }
    pairs
}

/// Swaps values of an integer column between records at most `p` ranks apart.
pub fn rank_swap<R: Rng + ?Sized>(
    dataset: &Dataset,
    attribute: &str,
    p: usize,
    rng: &mut R,
) -> Result<Dataset, AnonymizeError> {
    if p == 0 {
        return Err(AnonymizeError::InvalidParameter(
            "rank swap distance p must be at least 1".into(),
        ));
    }
    let (index, values) = integer_column(dataset, attribute)?;
    // order[rank] = record index
    let order = stable_rank_order(&values);
    let mut swapped = values.clone();
    for (i, l) in rank_swap_pairs(values.len(), p, rng) {
        let (a, b) = (order[i], order[l]);
        swapped[a] = values[b];
        swapped[b] = values[a];
    }
    Ok(dataset.with_column(index, swapped.into_iter().map(Value::Integer).collect()))
}
