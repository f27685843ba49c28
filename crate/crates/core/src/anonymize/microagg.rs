use std::collections::HashMap;

use super::{column_index, integer_column, rounded_mean, stable_rank_order, AnonymizeError};
use crate::dataset::{Dataset, Kind, Value};

fn check_k(k: usize) -> Result<(), AnonymizeError> {
    if k < 2 {
        return Err(AnonymizeError::InvalidParameter(format!(
            "group size k must be at least 2, got {k}"
        )));
    }
    Ok(())
}

fn check_size(n: usize, k: usize) -> Result<(), AnonymizeError> {
    if n > 0 && n < k {
        return Err(AnonymizeError::DatasetTooSmall {
            required: k,
            actual: n,
        });
    }
    Ok(())
}

/// Consecutive groups of `k` ranks; the last group takes the remainder.
pub fn univariate_groups(values: &[i64], k: usize) -> Vec<Vec<usize>> {
    let order = stable_rank_order(values);
    let n = order.len();
    if n == 0 || k == 0 {
        return Vec::new();
    }
    let full = (n / k).max(1);
    (0..full)
        .map(|g| {
            let end = if g + 1 == full { n } else { (g + 1) * k };
            order[g * k..end].to_vec()
        })
        .collect()
}

/// Replaces every integer attribute in `attributes` by its rounded group
/// mean. Text attributes listed in `attributes` are left as they are.
///
/// `groups` must partition the record indices.
pub fn aggregate_groups(
    dataset: &Dataset,
    attributes: &[&str],
    groups: &[Vec<usize>],
) -> Result<Dataset, AnonymizeError> {
    let n = dataset.len();
    let mut seen = vec![false; n];
    for &m in groups.iter().flatten() {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return Err(AnonymizeError::BadGrouping { records: n });
        }
    }
    if seen.iter().any(|s| !s) || groups.iter().any(Vec::is_empty) {
        return Err(AnonymizeError::BadGrouping { records: n });
    }

    let mut out = dataset.clone();
    for &name in attributes {
        let index = column_index(dataset, name)?;
        if dataset.schema().attributes()[index].kind != Kind::Integer {
            continue;
        }
        let (_, values) = integer_column(dataset, name)?;
        let mut column: Vec<Value> = values.iter().copied().map(Value::Integer).collect();
        for group in groups {
            let sum: i128 = group.iter().map(|&m| values[m] as i128).sum();
            let mean = rounded_mean(sum, group.len());
            for &m in group {
                column[m] = Value::Integer(mean);
            }
        }
        out = out.with_column(index, column);
    }
    Ok(out)
}

/// Sorts by the attribute, cuts into groups of `k` (the last absorbs the
/// remainder) and replaces each value with its rounded group mean.
pub fn microaggregate_univariate(
    dataset: &Dataset,
    attribute: &str,
    k: usize,
) -> Result<Dataset, AnonymizeError> {
    check_k(k)?;
    let (_, values) = integer_column(dataset, attribute)?;
    check_size(values.len(), k)?;
    let groups = univariate_groups(&values, k);
    aggregate_groups(dataset, &[attribute], &groups)
}

/// Record coordinates for the grouping distance: z-scored integers plus
/// categorical codes for text.
struct Points {
    numeric: Vec<Vec<f64>>,
    categorical: Vec<Vec<u32>>,
    categories: Vec<usize>,
}

impl Points {
    fn new(dataset: &Dataset, attributes: &[&str]) -> Result<Self, AnonymizeError> {
        let n = dataset.len();
        let mut numeric_cols = Vec::new();
        let mut categorical_cols = Vec::new();
        let mut categories = Vec::new();
        for &name in attributes {
            let index = column_index(dataset, name)?;
            match dataset.schema().attributes()[index].kind {
                Kind::Integer => {
                    let (_, values) = integer_column(dataset, name)?;
                    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
                    let var = values
                        .iter()
                        .map(|&v| (v as f64 - mean).powi(2))
                        .sum::<f64>()
                        / n as f64;
                    let sd = var.sqrt();
                    numeric_cols.push(
                        values
                            .iter()
                            .map(|&v| {
                                if sd > 0.0 {
                                    (v as f64 - mean) / sd
                                } else {
                                    0.0
                                }
                            })
                            .collect::<Vec<_>>(),
                    );
                }
                Kind::Text => {
                    let mut codes: HashMap<&Value, u32> = HashMap::new();
                    let column = dataset
                        .records()
                        .iter()
                        .map(|r| {
                            let next = codes.len() as u32;
                            *codes.entry(&r[index]).or_insert(next)
                        })
                        .collect::<Vec<_>>();
                    categories.push(codes.len());
                    categorical_cols.push(column);
                }
            }
        }
        Ok(Self {
            numeric: transpose(&numeric_cols, n),
            categorical: transpose(&categorical_cols, n),
            categories,
        })
    }

    fn dist2(&self, a: usize, b: usize) -> f64 {
        let numeric: f64 = self.numeric[a]
            .iter()
            .zip(&self.numeric[b])
            .map(|(x, y)| (x - y).powi(2))
            .sum();
        let mismatches = self.categorical[a]
            .iter()
            .zip(&self.categorical[b])
            .filter(|(x, y)| x != y)
            .count();
        numeric + mismatches as f64
    }

    /// Squared distance of every member of `set` to the set's average record.
    /// A categorical coordinate contributes the squared share of records in
    /// `set` that differ from the member's category.
    fn dist2_to_centroid(&self, set: &[usize]) -> Vec<f64> {
        let m = set.len() as f64;
        let dims = self.numeric.first().map_or(0, Vec::len);
        let mut centroid = vec![0.0; dims];
        for &i in set {
            for (c, x) in centroid.iter_mut().zip(&self.numeric[i]) {
                *c += x / m;
            }
        }
        let mut shares: Vec<Vec<f64>> = self.categories.iter().map(|&c| vec![0.0; c]).collect();
        for &i in set {
            for (share, &code) in shares.iter_mut().zip(&self.categorical[i]) {
                share[code as usize] += 1.0 / m;
            }
        }
        set.iter()
            .map(|&i| {
                let numeric: f64 = self.numeric[i]
                    .iter()
                    .zip(&centroid)
                    .map(|(x, c)| (x - c).powi(2))
                    .sum();
                let categorical: f64 = self.categorical[i]
                    .iter()
                    .zip(&shares)
                    .map(|(&code, share)| (1.0 - share[code as usize]).powi(2))
                    .sum();
                numeric + categorical
            })
            .collect()
    }
}

fn transpose<T: Copy>(cols: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

/// First position of the maximum, so ties go to the lowest record index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Removes and returns `center` plus its `k - 1` nearest neighbours from
/// `remaining` (sorted by record index).
fn take_group(points: &Points, remaining: &mut Vec<usize>, center: usize, k: usize) -> Vec<usize> {
    let mut by_distance: Vec<(f64, usize)> = remaining
        .iter()
        .filter(|&&i| i != center)
        .map(|&i| (points.dist2(center, i), i))
        .collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut group = vec![center];
    group.extend(by_distance.iter().take(k - 1).map(|&(_, i)| i));
    remaining.retain(|i| !group.contains(i));
    group
}

fn farthest_from_centroid(points: &Points, remaining: &[usize]) -> usize {
    remaining[argmax(&points.dist2_to_centroid(remaining))]
}

fn farthest_from(points: &Points, remaining: &[usize], from: usize) -> usize {
    let d: Vec<f64> = remaining.iter().map(|&i| points.dist2(from, i)).collect();
    remaining[argmax(&d)]
}

/// Maximum-distance-to-average grouping.
///
/// While at least `3k` records remain, the record `r` farthest from the
/// average record and the record `s` farthest from `r` each seed a group of
/// their `k` nearest neighbours. With `2k..3k` left, one more group forms
/// around the farthest record and the rest become the last group; fewer than
/// `2k` always form the last group. Every group therefore has `k..2k` members.
pub fn mdav_groups(
    dataset: &Dataset,
    attributes: &[&str],
    k: usize,
) -> Result<Vec<Vec<usize>>, AnonymizeError> {
    check_k(k)?;
    if attributes.is_empty() {
        return Err(AnonymizeError::EmptyQiList);
    }
    let points = Points::new(dataset, attributes)?;
    check_size(dataset.len(), k)?;

    let mut remaining: Vec<usize> = (0..dataset.len()).collect();
    let mut groups = Vec::new();
    while remaining.len() >= 3 * k {
        let r = farthest_from_centroid(&points, &remaining);
        let mut s = farthest_from(&points, &remaining, r);
        groups.push(take_group(&points, &mut remaining, r, k));
        if !remaining.contains(&s) {
            s = farthest_from(&points, &remaining, r);
        }
        groups.push(take_group(&points, &mut remaining, s, k));
    }
    if remaining.len() >= 2 * k {
        let r = farthest_from_centroid(&points, &remaining);
        groups.push(take_group(&points, &mut remaining, r, k));
    }
    if !remaining.is_empty() {
        groups.push(remaining);
    }
    Ok(groups)
}

/// Groups records by [`mdav_groups`] over `attributes` and replaces each
/// integer attribute among them by its rounded group mean.
pub fn microaggregate_multivariate(
    dataset: &Dataset,
    attributes: &[&str],
    k: usize,
) -> Result<Dataset, AnonymizeError> {
    let groups = mdav_groups(dataset, attributes, k)?;
    aggregate_groups(dataset, attributes, &groups)
}
