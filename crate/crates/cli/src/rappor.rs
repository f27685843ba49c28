use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use privkit_core::rappor::{
    bloom_encode, epsilon_infinity, epsilon_one, estimate_counts, hash_indices, make_report,
    report_marginals, simulate, ReportEnvelope,
};
use privkit_core::RapporParams;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::io::{emit, epsilon_json, inline_or_file, read_text, write_atomic};
use crate::RapporCommand;

fn optional_epsilon(r: std::result::Result<f64, privkit_core::RapporError>) -> Value {
    match r {
        Ok(eps) => epsilon_json(eps),
        Err(e) => {
            log::warn!("{e}");
            Value::Null
        }
    }
}

fn read_envelopes(path: &Path) -> Result<Vec<ReportEnvelope>> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| CliError::at(path, e));
    }
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| CliError::at(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn run(command: RapporCommand, out: &mut dyn Write) -> Result<()> {
    match command {
        RapporCommand::Encode { params, value } => {
            let params: RapporParams = inline_or_file(&params)?;
            let filter = bloom_encode(&value, &params);
            emit(
                out,
                json!({
                    "value": value,
                    "indices": hash_indices(&value, &params),
                    "bits": filter.to_bit_string(),
                    "hex": filter.to_hex(),
                }),
            )
        }
        RapporCommand::Report {
            params,
            value,
            secret,
            seed,
        } => {
            let params: RapporParams = inline_or_file(&params)?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let report = make_report(&value, secret.as_bytes(), &params, &mut rng);
            let envelope = ReportEnvelope::new(&report, &params);
            emit(out, serde_json::to_value(envelope)?)
        }
        RapporCommand::Epsilon { params } => {
            let params: RapporParams = inline_or_file(&params)?;
            let m = report_marginals(&params);
            emit(
                out,
                json!({
                    "params_digest": params.digest(),
                    "epsilon_infinity": optional_epsilon(epsilon_infinity(&params)),
                    "epsilon_one": optional_epsilon(epsilon_one(&params)),
                    "q_star": m.q_star,
                    "p_star": m.p_star,
                }),
            )
        }
        RapporCommand::Simulate {
            params,
            clients,
            dist,
            seed,
            output,
        } => {
            let params: RapporParams = inline_or_file(&params)?;
            let shares: BTreeMap<String, f64> = inline_or_file(&dist)?;
            let population: Vec<(String, f64)> = shares.into_iter().collect();
            let sim = simulate(&population, clients, &params, seed)?;
            let envelopes: Vec<ReportEnvelope> = sim
                .reports
                .iter()
                .map(|r| ReportEnvelope::new(r, &params))
                .collect();
            let true_counts: BTreeMap<&str, usize> = sim
                .true_counts
                .iter()
                .map(|(v, c)| (v.as_str(), *c))
                .collect();
            let mut doc = json!({
                "clients": clients,
                "params_digest": params.digest(),
                "true_counts": true_counts,
            });
            match output {
                Some(path) => {
                    let mut lines = String::new();
                    for env in &envelopes {
                        lines.push_str(&serde_json::to_string(env)?);
                        lines.push('\n');
                    }
                    write_atomic(&path, lines.as_bytes())?;
                    doc["output"] = json!(path.display().to_string());
                }
                None => doc["reports"] = serde_json::to_value(&envelopes)?,
            }
            emit(out, doc)
        }
        RapporCommand::Estimate {
            params,
            reports,
            candidates,
        } => {
            let params: RapporParams = inline_or_file(&params)?;
            let candidates: Vec<String> = inline_or_file(&candidates)?;
            let opened = read_envelopes(&reports)?
                .iter()
                .enumerate()
                .map(|(i, env)| {
                    env.open(&params)
                        .map_err(|e| CliError::data(format!("report {i}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let names: Vec<&str> = candidates.iter().map(String::as_str).collect();
            let estimates = estimate_counts(&opened, &names, &params)?;
            let n = opened.len() as f64;
            let rows: Vec<Value> = estimates
                .iter()
                .map(
                    |e| json!({ "candidate": e.candidate, "count": e.count, "share": e.count / n }),
                )
                .collect();
            emit(out, json!({ "reports": opened.len(), "estimates": rows }))
        }
    }
}
