use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{hash_indices, make_report, report_marginals, RapporError, RapporParams, Report};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub candidate: String,
    /// Estimated number of reports carrying this candidate.
    pub count: f64,
}

/// Per-candidate counts from a batch of reports.
///
/// Each bit's set-count `c_i` over `N` reports is inverted to
/// `t_i = (c_i - p* N) / (q* - p*)`, clamped to `[0, N]`. A candidate's
/// estimate is the smallest `t_i` over its Bloom positions.
pub fn estimate_counts(
    reports: &[Report],
    candidates: &[&str],
    params: &RapporParams,
) -> Result<Vec<Estimate>, RapporError> {
    if reports.is_empty() {
        return Err(RapporError::NoReports);
    }
    let k = params.k;
    if let Some(bad) = reports.iter().find(|r| r.len() != k) {
        return Err(RapporError::LengthMismatch {
            expected: k,
            found: bad.len(),
        });
    }
    let m = report_marginals(params);
    let signal = m.q_star - m.p_star;
    if signal == 0.0 {
        return Err(RapporError::DegenerateParams);
    }

    let counts = reports
        .par_iter()
        .fold(
            || vec![0u64; k],
            |mut acc, r| {
                for (c, &b) in acc.iter_mut().zip(r.bits.bits()) {
                    *c += b as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let n = reports.len() as f64;
    let per_bit: Vec<f64> = counts
        .iter()
        .map(|&c| ((c as f64 - m.p_star * n) / signal).clamp(0.0, n))
        .collect();

    Ok(candidates
        .iter()
        .map(|&candidate| {
            let count = hash_indices(candidate, params)
                .into_iter()
                .map(|i| per_bit[i])
                .fold(f64::INFINITY, f64::min);
            Estimate {
                candidate: candidate.to_owned(),
                count,
            }
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub reports: Vec<Report>,
    /// Exact number of clients holding each value, in population order.
    pub true_counts: Vec<(String, usize)>,
}

/// Generates one report per simulated client.
///
/// Client `i` holds the value whose cumulative share first exceeds
/// `(i + 0.5) / clients`, so realized counts match the shares up to
/// rounding. Client `i` draws its secret and IRR coins from stream `i` of a
/// generator seeded with `seed`, which makes the output independent of
/// thread scheduling.
pub fn simulate(
    population: &[(String, f64)],
    clients: usize,
    params: &RapporParams,
    seed: u64,
) -> Result<Simulation, RapporError> {
    if population.is_empty() {
        return Err(RapporError::BadDistribution("no values given".into()));
    }
    if let Some((v, s)) = population.iter().find(|(_, s)| !s.is_finite() || *s < 0.0) {
        return Err(RapporError::BadDistribution(format!(
            "share of `{v}` is {s}"
        )));
    }
    let total: f64 = population.iter().map(|(_, s)| s).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(RapporError::BadDistribution(format!(
            "shares sum to {total}, not 1"
        )));
    }

    let mut cumulative = Vec::with_capacity(population.len());
    let mut acc = 0.0;
    for (_, s) in population {
        acc += s;
        cumulative.push(acc);
    }
    let value_of = |i: usize| {
        let u = (i as f64 + 0.5) / clients as f64;
        cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(population.len() - 1)
    };

    let reports = (0..clients)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let secret: [u8; 16] = rng.random();
            make_report(&population[value_of(i)].0, &secret, params, &mut rng)
        })
        .collect();

    let mut true_counts: Vec<(String, usize)> =
        population.iter().map(|(v, _)| (v.clone(), 0)).collect();
    for i in 0..clients {
        true_counts[value_of(i)].1 += 1;
    }
    Ok(Simulation {
        reports,
        true_counts,
    })
}
