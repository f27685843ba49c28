use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use privkit_core::anonymize::{
    equivalence_classes, generalize, k_anonymity, l_diversity, suppress, GeneralizationRule,
};
use privkit_core::assoc::{solid_rules, TransactionSet};
use privkit_core::dataset::{medical_records, medical_records_schema, write_csv_string};
use privkit_core::dpcheck::{exact_epsilon, prr_distribution, report_distribution};
use privkit_core::rappor::{epsilon_infinity, epsilon_one};
use privkit_core::smc::run_secret_sum;
use privkit_core::{BloomFilter, Dataset, Kind, RapporParams};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::io::{emit, epsilon_json, inline_or_file, load_dataset, read_json, write_atomic};
use crate::pipeline::{self, PipelineConfig};
use crate::{MineArgs, Mode};

pub fn metrics_json(dataset: &Dataset, qi: &[String], sensitive: Option<&str>) -> Result<Value> {
    let qi: Vec<&str> = qi.iter().map(String::as_str).collect();
    let partition = equivalence_classes(dataset, &qi)?;
    let classes: Vec<Value> = partition
        .classes
        .iter()
        .map(|c| {
            let key: Vec<String> = c.key.iter().map(ToString::to_string).collect();
            json!({ "key": key, "members": c.members })
        })
        .collect();
    let mut doc = json!({
        "records": dataset.len(),
        "qi": qi,
        "k": k_anonymity(dataset, &qi)?,
        "class_sizes": partition.sizes(),
        "classes": classes,
    });
    if let Some(s) = sensitive {
        doc["sensitive"] = json!(s);
        doc["l"] = json!(l_diversity(dataset, &qi, s)?);
    }
    Ok(doc)
}

pub fn metrics(
    input: &Path,
    schema: &Path,
    qi: &[String],
    sensitive: Option<&str>,
    out: &mut dyn Write,
) -> Result<()> {
    let dataset = load_dataset(input, schema)?;
    emit(out, metrics_json(&dataset, qi, sensitive)?)
}

pub fn anonymize(config_path: &Path, global_seed: Option<u64>, out: &mut dyn Write) -> Result<()> {
    let mut config: PipelineConfig = read_json(config_path)?;
    config.resolve_paths(config_path.parent().unwrap_or(Path::new(".")));
    let steps = pipeline::parse_steps(&config.steps)?;
    let dataset = load_dataset(&config.input, &config.schema)?;
    pipeline::validate(&steps, &dataset, global_seed)?;
    let result = pipeline::run_steps(&steps, dataset, global_seed)?;

    let schema_out = pipeline::output_schema(&steps, result.schema());
    let metrics = match &config.metrics {
        Some(m) => Some(metrics_json(&result, &m.qi, m.sensitive.as_deref())?),
        None => None,
    };

    write_atomic(&config.output, write_csv_string(&result).as_bytes())?;
    if let Some(path) = &config.output_schema {
        write_atomic(path, schema_out.to_json().as_bytes())?;
    }
    log::info!(
        "wrote {} records to {}",
        result.len(),
        config.output.display()
    );

    let step_list: Vec<Value> = steps
        .iter()
        .map(|s| json!({ "op": s.name, "seed": s.seed }))
        .collect();
    let mut doc = json!({
        "records": result.len(),
        "output": config.output.display().to_string(),
        "steps": step_list,
    });
    if let Some(m) = metrics {
        doc["metrics"] = m;
    }
    emit(out, doc)
}

fn parse_bits(flag: &str, text: &str) -> Result<BloomFilter> {
    BloomFilter::from_bit_string(text)
        .ok_or_else(|| CliError::Usage(format!("{flag} must be a string of 0 and 1, got `{text}`")))
}

pub fn dpcheck(
    params: &str,
    mode: Mode,
    bits1: &str,
    bits2: &str,
    out: &mut dyn Write,
) -> Result<()> {
    let params: RapporParams = inline_or_file(params)?;
    let b1 = parse_bits("--bits1", bits1)?;
    let b2 = parse_bits("--bits2", bits2)?;
    for b in [&b1, &b2] {
        if b.len() != params.k {
            return Err(CliError::data(format!(
                "filter has {} bits but params.k is {}",
                b.len(),
                params.k
            )));
        }
    }
    let (exact, closed, closed_name, mode_name) = match mode {
        Mode::Prr => (
            exact_epsilon(
                &prr_distribution(&b1, &params)?,
                &prr_distribution(&b2, &params)?,
            )?,
            epsilon_infinity(&params),
            "epsilon_infinity",
            "prr",
        ),
        Mode::Report => (
            exact_epsilon(
                &report_distribution(&b1, &params)?,
                &report_distribution(&b2, &params)?,
            )?,
            epsilon_one(&params),
            "epsilon_one",
            "report",
        ),
    };
    let closed_value = match closed {
        Ok(eps) => epsilon_json(eps),
        Err(e) => {
            log::warn!("closed form unavailable: {e}");
            Value::Null
        }
    };
    emit(
        out,
        json!({
            "mode": mode_name,
            "bits": params.k,
            "exact_epsilon": epsilon_json(exact),
            "closed_form": closed_name,
            "closed_form_epsilon": closed_value,
        }),
    )
}

pub fn smc_demo(votes: &[u64], modulus: u64, seed: u64, out: &mut dyn Write) -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let t = run_secret_sum(votes, modulus, &mut rng)?;
    let parties: Vec<Value> = (0..votes.len())
        .map(|i| {
            json!({
                "party": i,
                "x": t.points[i],
                "shares_sent": t.shares[i],
                "shares_received": t.shares.iter().map(|row| row[i]).collect::<Vec<_>>(),
                "aggregated": t.aggregated[i],
            })
        })
        .collect();
    emit(
        out,
        json!({
            "modulus": t.modulus,
            "parties": parties,
            "sum": t.sum,
        }),
    )
}

pub fn assoc_mine(args: &MineArgs, out: &mut dyn Write) -> Result<()> {
    let transactions = match (&args.input, &args.dataset, &args.schema) {
        (Some(input), _, _) => {
            let rows: Vec<BTreeSet<String>> = read_json(input)?;
            TransactionSet::new(rows)
        }
        (None, Some(dataset), Some(schema)) => {
            let ds = load_dataset(dataset, schema)?;
            let columns: Vec<&str> = args.columns.iter().map(String::as_str).collect();
            TransactionSet::from_dataset(&ds, &columns)?
        }
        _ => {
            return Err(CliError::Usage(
                "give --input, or --dataset with --schema and --columns".into(),
            ))
        }
    };
    let rules = solid_rules(
        &transactions,
        args.min_support,
        args.min_certainty,
        args.max_itemset,
    )?;
    emit(
        out,
        json!({
            "transactions": transactions.len(),
            "min_support": args.min_support,
            "min_certainty": args.min_certainty,
            "max_itemset": args.max_itemset,
            "rules": rules,
        }),
    )
}

pub fn export_fixtures(dir: &Path, out: &mut dyn Write) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::at(dir, e))?;
    let records = medical_records();
    let generalized = generalize(
        &suppress(&records, &["Name"])?,
        &[
            GeneralizationRule::numeric_bins("Age", 10, 0),
            GeneralizationRule::text_prefix("ZIP", 2),
        ],
    )?;
    let mut generalized_attributes = medical_records_schema().attributes().to_vec();
    for a in &mut generalized_attributes {
        a.kind = Kind::Text;
    }
    let generalized_schema =
        privkit_core::Schema::new(generalized_attributes).expect("fixture schema is valid");

    let files = [
        ("records.csv", write_csv_string(&records)),
        ("records.schema.json", medical_records_schema().to_json()),
        ("generalized.csv", write_csv_string(&generalized)),
        ("generalized.schema.json", generalized_schema.to_json()),
    ];
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        written.push(path.display().to_string());
    }
    emit(out, json!({ "files": written }))
}
