//! Synthetic workloads shared by the benchmarks.

use std::collections::BTreeSet;

use privkit_core::assoc::TransactionSet;
use privkit_core::{Attribute, AttributeRole, Dataset, Kind, Schema, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` records of (Gender, Age, Income) with a seeded generator.
pub fn people(n: usize, seed: u64) -> Dataset {
    let schema = Schema::new(vec![
        Attribute::new("Gender", AttributeRole::QuasiIdentifier, Kind::Text),
        Attribute::new("Age", AttributeRole::QuasiIdentifier, Kind::Integer),
        Attribute::new("Income", AttributeRole::Sensitive, Kind::Integer),
    ])
    .expect("distinct names");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|_| {
            let gender = if rng.random::<bool>() {
                "Female"
            } else {
                "Male"
            };
            vec![
                Value::text(gender),
                Value::Integer(rng.random_range(18..90)),
                Value::Integer(rng.random_range(10_000..200_000)),
            ]
        })
        .collect();
    Dataset::new(schema, records).expect("records match schema")
}

/// `n` baskets over `items` items, each item present with probability
/// `density`.
pub fn baskets(n: usize, items: usize, density: f64, seed: u64) -> TransactionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<BTreeSet<String>> = (0..n)
        .map(|_| {
            (0..items)
                .filter(|_| rng.random::<f64>() < density)
                .map(|i| format!("item{i:02}"))
                .collect()
        })
        .collect();
    TransactionSet::new(rows)
}
