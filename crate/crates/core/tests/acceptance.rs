//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails or overruns its time bound.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use privkit_core::anonymize::{
    add_noise, aggregate_groups, equivalence_classes, generalize, k_anonymity, l_diversity,
    rank_swap, suppress, swap_values, GeneralizationRule, NoiseSpec,
};
use privkit_core::assoc::{solid_rules, TransactionSet};
use privkit_core::dataset::{
    medical_records, Attribute, AttributeRole, Dataset, Kind, Schema, Value,
};
use privkit_core::dpcheck::{exact_epsilon, prr_distribution, report_distribution};
use privkit_core::rappor::{
    bloom_check, bloom_encode, bloom_encode_all, epsilon_infinity, epsilon_one, estimate_counts,
    hash_indices, make_report, prr, report_marginals, simulate, RapporParams,
};
use privkit_core::smc::{evaluate, run_secret_sum, FieldElement, DEFAULT_MODULUS};
use privkit_core::BloomFilter;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 table fixtures golden suite", 1, table_fixtures),
        (
            "2 microaggregation with fixed grouping",
            1,
            microaggregation,
        ),
        (
            "3 epsilon-infinity worked example",
            1,
            epsilon_infinity_example,
        ),
        ("4 epsilon-one oracle arbitration", 5, epsilon_one_oracle),
        (
            "5 end-to-end frequency estimation",
            30,
            end_to_end_estimation,
        ),
        (
            "6 permanent response memoization and marginals",
            10,
            prr_marginals,
        ),
        ("7 secret sum", 10, secret_sum),
        ("8 transform properties", 30, transform_properties),
        ("9 association rules vs brute force", 30, association_rules),
        ("10 bloom filter behavior", 30, bloom_behavior),
    ];
    let mut failed = 0;
    for (name, bound_secs, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let bound = Duration::from_secs(bound_secs);
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= bound => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {bound_secs}s bound")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.3}s, bound {bound_secs}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn table_fixtures() -> Outcome {
    let expected: [[&str; 5]; 10] = [
        ["*", "40-49", "Female", "12*", "Cancer"],
        ["*", "20-29", "Male", "12*", "Migraine"],
        ["*", "30-39", "Male", "12*", "Incontinence"],
        ["*", "30-39", "Male", "12*", "Incontinence"],
        ["*", "40-49", "Female", "12*", "No illness"],
        ["*", "20-29", "Male", "12*", "Diabetes"],
        ["*", "40-49", "Female", "12*", "Cancer"],
        ["*", "20-29", "Female", "12*", "Cancer"],
        ["*", "20-29", "Male", "12*", "No illness"],
        ["*", "20-29", "Female", "12*", "Diabetes"],
    ];
    let suppressed = suppress(&medical_records(), &["Name"]).map_err(|e| e.to_string())?;
    let generalized = generalize(
        &suppressed,
        &[
            GeneralizationRule::numeric_bins("Age", 10, 0),
            GeneralizationRule::text_prefix("ZIP", 2),
        ],
    )
    .map_err(|e| e.to_string())?;
    for (row, (record, want)) in generalized.records().iter().zip(&expected).enumerate() {
        let got: Vec<String> = record.iter().map(Value::to_string).collect();
        ensure!(got == want, "row {row}: got {got:?}, expected {want:?}");
    }
    let qi = ["Age", "Gender", "ZIP"];
    let mut sizes = equivalence_classes(&generalized, &qi)
        .map_err(|e| e.to_string())?
        .sizes();
    sizes.sort();
    ensure!(sizes == [2, 2, 3, 3], "class sizes {sizes:?}");
    let k = k_anonymity(&generalized, &qi).map_err(|e| e.to_string())?;
    let l = l_diversity(&generalized, &qi, "Diagnosis").map_err(|e| e.to_string())?;
    ensure!(k == 2 && l == 1, "k = {k}, l = {l}");
    Ok("10 rows match; k = 2, l = 1".into())
}

fn microaggregation() -> Outcome {
    // Female 40s, male 20s, female 20s, male 30s, listed in that order.
    let groups = vec![vec![0, 6, 4], vec![7, 9], vec![1, 8, 5], vec![2, 3]];
    let order: Vec<usize> = groups.iter().flatten().copied().collect();
    let ds = medical_records();
    for attributes in [&["Age"][..], &["Gender", "Age"][..]] {
        let out = aggregate_groups(&ds, attributes, &groups).map_err(|e| e.to_string())?;
        let ages: Vec<i64> = order
            .iter()
            .map(|&r| out.records()[r][1].as_integer().unwrap())
            .collect();
        ensure!(
            ages == [44, 44, 44, 24, 24, 23, 23, 23, 37, 37],
            "{attributes:?}: ages {ages:?}"
        );
    }
    Ok("ages 44,44,44,24,24,23,23,23,37,37 exactly".into())
}

fn epsilon_infinity_example() -> Outcome {
    let params = RapporParams::new(8, 2, 0.5, 0.5, 0.75, 0).unwrap();
    let closed = epsilon_infinity(&params).map_err(|e| e.to_string())?;
    let independent = 2.0 * 2.0 * (0.75f64 / 0.25).ln();
    ensure!(
        (closed - independent).abs() < 1e-12,
        "closed form {closed} vs 4 ln 3"
    );
    ensure!(
        (closed - 4.3945).abs() < 1e-3,
        "closed form {closed} vs quoted 4.3945"
    );
    let b1 = BloomFilter::with_indices(8, &[0, 1]);
    let b2 = BloomFilter::with_indices(8, &[4, 5]);
    let exact = exact_epsilon(
        &prr_distribution(&b1, &params).unwrap(),
        &prr_distribution(&b2, &params).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        (exact - closed).abs() < 1e-9,
        "enumerated {exact} vs closed {closed}"
    );
    Ok(format!("closed form {closed:.6}, enumerated {exact:.9}"))
}

fn epsilon_one_oracle() -> Outcome {
    const QUOTED: f64 = 1.5499;
    let mut formula = f64::NAN;
    for k in [4, 8, 12] {
        let params = RapporParams::new(k, 2, 0.5, 0.5, 0.75, 0).unwrap();
        formula = epsilon_one(&params).map_err(|e| e.to_string())?;
        let b1 = BloomFilter::with_indices(k, &[0, 1]);
        let b2 = BloomFilter::with_indices(k, &[k - 2, k - 1]);
        let exact = exact_epsilon(
            &report_distribution(&b1, &params).unwrap(),
            &report_distribution(&b2, &params).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        ensure!(
            (exact - formula).abs() < 1e-9,
            "k = {k}: enumerated {exact} vs formula {formula}"
        );
    }

    // No pair of 2-bit filters exceeds the disjoint case.
    let params = RapporParams::new(6, 2, 0.5, 0.5, 0.75, 0).unwrap();
    let filters: Vec<BloomFilter> = (0..6)
        .flat_map(|a| (a + 1..6).map(move |b| BloomFilter::with_indices(6, &[a, b])))
        .collect();
    let dists: Vec<_> = filters
        .iter()
        .map(|f| report_distribution(f, &params).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for a in &dists {
        for b in &dists {
            worst = worst.max(exact_epsilon(a, b).unwrap());
        }
    }
    ensure!(
        (worst - formula).abs() < 1e-9,
        "worst pair {worst} vs formula {formula}"
    );
    ensure!(
        (formula - QUOTED).abs() > 1e-3,
        "formula {formula} unexpectedly matches quoted {QUOTED}"
    );
    Ok(format!(
        "formula = enumeration = {formula:.6}; quoted value {QUOTED} differs"
    ))
}

/// First hash seed giving each candidate two distinct positions and no
/// position shared between candidates.
fn collision_free_params(k: usize, candidates: &[&str]) -> RapporParams {
    (0..)
        .map(|seed| RapporParams::worked_example(k, seed))
        .find(|params| {
            let mut seen = BTreeSet::new();
            candidates
                .iter()
                .flat_map(|c| hash_indices(c, params))
                .all(|i| seen.insert(i))
        })
        .expect("some seed separates the candidates")
}

/// Largest absolute share error over the candidates for one simulation seed.
fn worst_share_error(
    truth: &[(&str, f64)],
    clients: usize,
    params: &RapporParams,
    seed: u64,
) -> Result<(f64, Vec<f64>), String> {
    let candidates: Vec<&str> = truth.iter().map(|(v, _)| *v).collect();
    let population: Vec<(String, f64)> = truth.iter().map(|(v, s)| (v.to_string(), *s)).collect();
    let sim = simulate(&population, clients, params, seed).map_err(|e| e.to_string())?;
    let estimates =
        estimate_counts(&sim.reports, &candidates, params).map_err(|e| e.to_string())?;
    let shares: Vec<f64> = estimates.iter().map(|e| e.count / clients as f64).collect();
    let worst = truth
        .iter()
        .zip(&shares)
        .map(|((_, s), e)| (e - s).abs())
        .fold(0.0, f64::max);
    Ok((worst, shares))
}

fn end_to_end_estimation() -> Outcome {
    const CLIENTS: usize = 100_000;
    const TOLERANCE: f64 = 0.03;
    let truth = [("A", 0.5), ("B", 0.3), ("C", 0.2)];
    let candidates: Vec<&str> = truth.iter().map(|(v, _)| *v).collect();
    let params = collision_free_params(32, &candidates);

    let (worst, shares) = worst_share_error(&truth, CLIENTS, &params, 0)?;
    ensure!(
        worst <= TOLERANCE,
        "seed 0: estimated shares {shares:?}, worst error {worst:.4}"
    );

    // Each per-bit estimate has a standard error near 1.25 points, so the
    // tolerance is about 2.4 sigma; report how often other seeds meet it.
    let mut within = 0;
    for seed in 1..20 {
        within += (worst_share_error(&truth, CLIENTS, &params, seed)?.0 <= TOLERANCE) as usize;
    }
    Ok(format!(
        "hash seed {}, shares {:.4}/{:.4}/{:.4}; seeds 1-19 within tolerance: {within}/19",
        params.hash_seed, shares[0], shares[1], shares[2]
    ))
}

fn prr_marginals() -> Outcome {
    const TRIALS: usize = 100_000;
    let params = RapporParams::worked_example(16, 0);
    let v = "chlamydia";
    let filter = bloom_encode(v, &params);
    let first = prr(&filter, b"client secret", v, &params);
    for _ in 0..100 {
        ensure!(
            prr(&filter, b"client secret", v, &params) == first,
            "prr not memoized"
        );
    }

    let one = filter.set_indices()[0];
    let zero = (0..params.k).find(|&i| !filter.get(i)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut ones_at_one, mut ones_at_zero) = (0usize, 0usize);
    for t in 0..TRIALS {
        let secret = (t as u64).to_le_bytes();
        let report = make_report(v, &secret, &params, &mut rng);
        ones_at_one += report.bits.get(one) as usize;
        ones_at_zero += report.bits.get(zero) as usize;
    }
    // q* = (1 - f/2) q + (f/2) p, p* = (f/2) q + (1 - f/2) p
    let q_star = 0.75 * 0.75 + 0.25 * 0.5;
    let p_star = 0.25 * 0.75 + 0.75 * 0.5;
    let m = report_marginals(&params);
    ensure!(
        (m.q_star - q_star).abs() < 1e-15 && (m.p_star - p_star).abs() < 1e-15,
        "marginals {m:?}"
    );
    let q_hat = ones_at_one as f64 / TRIALS as f64;
    let p_hat = ones_at_zero as f64 / TRIALS as f64;
    ensure!(
        (q_hat - q_star).abs() <= 0.005,
        "P(S=1|B=1) = {q_hat}, q* = {q_star}"
    );
    ensure!(
        (p_hat - p_star).abs() <= 0.005,
        "P(S=1|B=0) = {p_hat}, p* = {p_star}"
    );
    Ok(format!(
        "100 identical calls; q^ = {q_hat:.4} (q* {q_star}), p^ = {p_hat:.4} (p* {p_star})"
    ))
}

fn secret_sum() -> Outcome {
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = run_secret_sum(&[1, 1, 0], DEFAULT_MODULUS, &mut rng).map_err(|e| e.to_string())?;
        ensure!(t.sum.value() == 2, "seed {seed}: sum {}", t.sum);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = 2 + case % 5;
        let modulus = [DEFAULT_MODULUS, 7, 101, 65_537][case % 4];
        let votes: Vec<u64> = (0..n).map(|_| rng.random_range(0..modulus)).collect();
        let plain = votes.iter().map(|&v| v as u128).sum::<u128>() % modulus as u128;
        let t = run_secret_sum(&votes, modulus, &mut rng).map_err(|e| e.to_string())?;
        ensure!(
            t.sum.value() as u128 == plain,
            "votes {votes:?} mod {modulus}: sum {}",
            t.sum
        );
    }

    // With P = 7 and three parties, a secret is the constant term of a
    // degree-2 polynomial with uniform c1, c2. Any one share, and any two
    // shares jointly, must be distributed the same for secrets 0 and 1.
    const P: u64 = 7;
    let joint = |secret: u64| {
        let mut single: BTreeMap<u64, usize> = BTreeMap::new();
        let mut pairs: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for c1 in 0..P {
            for c2 in 0..P {
                let poly = [secret, c1, c2].map(|c| FieldElement::new(c, P));
                let at = |x| evaluate(&poly, FieldElement::new(x, P)).value();
                *single.entry(at(1)).or_default() += 1;
                *pairs.entry((at(2), at(3))).or_default() += 1;
            }
        }
        (single, pairs)
    };
    let (single0, pairs0) = joint(0);
    let (single1, pairs1) = joint(1);
    ensure!(
        single0 == single1,
        "single share differs: {single0:?} vs {single1:?}"
    );
    ensure!(
        single0.len() == 7 && single0.values().all(|&c| c == 7),
        "single share not uniform"
    );
    ensure!(pairs0 == pairs1, "share pairs differ");
    ensure!(
        pairs0.len() == 49 && pairs0.values().all(|&c| c == 1),
        "share pairs not uniform"
    );
    Ok("50 seeds give 2; 200 random cases match; P=7 shares uniform".into())
}

fn int_dataset(values: &[i64]) -> Dataset {
    let schema = Schema::new(vec![
        Attribute::new("id", AttributeRole::ExplicitIdentifier, Kind::Integer),
        Attribute::new("x", AttributeRole::QuasiIdentifier, Kind::Integer),
    ])
    .unwrap();
    let records = values
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![Value::Integer(i as i64), Value::Integer(v)])
        .collect();
    Dataset::new(schema, records).unwrap()
}

fn column(ds: &Dataset) -> Vec<i64> {
    ds.column(1)
        .iter()
        .map(|v| v.as_integer().unwrap())
        .collect()
}

fn sorted(mut v: Vec<i64>) -> Vec<i64> {
    v.sort();
    v
}

fn transform_properties() -> Outcome {
    const SUPPORT: [i64; 4] = [-2, -1, 1, 2];
    // mean 0, variance (4 + 1 + 1 + 4) / 4
    const NOISE_VARIANCE: f64 = 2.5;
    let noise = NoiseSpec::plus_minus_two();
    let mut delta_sum = 0i64;
    let mut delta_count = 0usize;
    for case in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let n = rng.random_range(2..60);
        let values: Vec<i64> = (0..n).map(|_| rng.random_range(0..100)).collect();
        let ds = int_dataset(&values);

        let swapped = swap_values(&ds, "x", rng.random_range(0..=n / 2), &mut rng)
            .map_err(|e| e.to_string())?;
        ensure!(
            sorted(column(&swapped)) == sorted(values.clone()),
            "case {case}: swap changed multiset"
        );

        // Distinct values so ranks are unambiguous.
        let mut distinct: Vec<i64> = (0..n as i64).map(|i| i * 3).collect();
        distinct.shuffle(&mut rng);
        let p = rng.random_range(1..=8);
        let ranked =
            rank_swap(&int_dataset(&distinct), "x", p, &mut rng).map_err(|e| e.to_string())?;
        let after = column(&ranked);
        ensure!(
            sorted(after.clone()) == sorted(distinct.clone()),
            "case {case}: rank swap changed multiset"
        );
        for (before, now) in distinct.iter().zip(&after) {
            let displacement = (before - now).abs() / 3;
            ensure!(
                displacement <= p as i64,
                "case {case}: rank moved {displacement} > p = {p}"
            );
        }

        let noisy = add_noise(&ds, "x", &noise, &mut rng).map_err(|e| e.to_string())?;
        for (before, now) in values.iter().zip(column(&noisy)) {
            let delta = now - before;
            ensure!(SUPPORT.contains(&delta), "case {case}: noise delta {delta}");
            delta_sum += delta;
            delta_count += 1;
        }

        let mut last_k = 0;
        for width in [1, 5, 10, 20, 100] {
            let coarse = generalize(&ds, &[GeneralizationRule::numeric_bins("x", width, 0)])
                .map_err(|e| e.to_string())?;
            let k = k_anonymity(&coarse, &["x"]).map_err(|e| e.to_string())?;
            ensure!(
                k >= last_k,
                "case {case}: width {width} gave k {k} < {last_k}"
            );
            last_k = k;
        }
    }
    let mean = delta_sum as f64 / delta_count as f64;
    let bound = 3.0 * (NOISE_VARIANCE / delta_count as f64).sqrt();
    ensure!(mean.abs() <= bound, "noise mean {mean} outside ±{bound}");
    Ok(format!(
        "500 datasets; noise mean {mean:.4} within ±{bound:.4} over {delta_count} draws"
    ))
}

type RuleKey = (Vec<String>, Vec<String>, usize, usize);

fn brute_force_rules(items: &[String], transactions: &[BTreeSet<String>]) -> BTreeSet<RuleKey> {
    let n = transactions.len();
    let count = |mask: u32| {
        transactions
            .iter()
            .filter(|t| {
                (0..items.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .all(|i| t.contains(&items[i]))
            })
            .count()
    };
    let pick = |mask: u32| -> Vec<String> {
        (0..items.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| items[i].clone())
            .collect()
    };
    let mut rules = BTreeSet::new();
    for union in 1u32..1 << items.len() {
        let c_union = count(union);
        // support >= 0.35
        if n == 0 || c_union * 100 < 35 * n {
            continue;
        }
        let mut a = (union - 1) & union;
        while a > 0 {
            let c_a = count(a);
            // certainty >= 0.60
            if c_union * 10 >= 6 * c_a {
                rules.insert((pick(a), pick(union & !a), c_union, c_a));
            }
            a = (a - 1) & union;
        }
    }
    rules
}

fn association_rules() -> Outcome {
    let mut total_rules = 0;
    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
        let n_items = rng.random_range(1..=10);
        let items: Vec<String> = (0..n_items).map(|i| format!("i{i}")).collect();
        let density: f64 = rng.random_range(0.2..0.9);
        let transactions: Vec<BTreeSet<String>> = (0..rng.random_range(0..=30))
            .map(|_| {
                items
                    .iter()
                    .filter(|_| rng.random::<f64>() < density)
                    .cloned()
                    .collect()
            })
            .collect();
        let universe: BTreeSet<String> = items.iter().cloned().collect();
        let ts = TransactionSet::with_universe(universe, transactions.clone())
            .map_err(|e| e.to_string())?;
        let mined: BTreeSet<RuleKey> = solid_rules(&ts, 0.35, 0.60, n_items.max(2))
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|r| {
                (
                    r.antecedent.into_iter().collect(),
                    r.consequent.into_iter().collect(),
                    r.support_count,
                    r.antecedent_count,
                )
            })
            .collect();
        let expected = brute_force_rules(&items, &transactions);
        ensure!(
            mined == expected,
            "case {case}: mined {} rules, brute force {}",
            mined.len(),
            expected.len()
        );
        total_rules += expected.len();
    }
    Ok(format!(
        "100 instances agree ({total_rules} rules in total)"
    ))
}

fn bloom_behavior() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let params = RapporParams::new(128, 2, 0.5, 0.5, 0.75, 3).unwrap();
    for i in 0..10_000 {
        let v = format!("value-{}", rng.random::<u64>());
        let others: Vec<String> = (0..5)
            .map(|_| format!("other-{}", rng.random::<u64>()))
            .collect();
        let filter = bloom_encode_all(
            others.iter().map(String::as_str).chain([v.as_str()]),
            &params,
        );
        ensure!(
            bloom_check(&filter, &v, &params),
            "false negative for value {i}"
        );
    }

    const INSERTED: usize = 20;
    const FILTERS: usize = 100;
    const PROBES_PER_FILTER: usize = 1_000;
    let mut positives = 0;
    for trial in 0..FILTERS {
        let params = RapporParams::new(128, 2, 0.5, 0.5, 0.75, trial as u64).unwrap();
        let inserted: Vec<String> = (0..INSERTED).map(|j| format!("in-{trial}-{j}")).collect();
        let filter = bloom_encode_all(inserted.iter().map(String::as_str), &params);
        positives += (0..PROBES_PER_FILTER)
            .filter(|j| bloom_check(&filter, &format!("probe-{trial}-{j}"), &params))
            .count();
    }
    let rate = positives as f64 / (FILTERS * PROBES_PER_FILTER) as f64;
    let approx = (1.0 - (-2.0 * INSERTED as f64 / 128.0).exp()).powi(2);
    ensure!(
        rate >= approx / 2.0 && rate <= approx * 2.0,
        "false-positive rate {rate} vs approximation {approx}"
    );
    Ok(format!(
        "no false negatives; FP rate {rate:.4} vs approximation {approx:.4}"
    ))
}
