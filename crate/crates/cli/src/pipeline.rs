//! JSON-described transform pipelines for `privkit anonymize`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use privkit_core::anonymize::{
    add_noise, generalize, microaggregate_multivariate, microaggregate_univariate, rank_swap,
    suppress, swap_values, GeneralizationRule, NoiseSpec, Strategy,
};
use privkit_core::{Dataset, Kind, Schema};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub schema: PathBuf,
    pub output: PathBuf,
    /// Where to write a schema describing the output, with generalized or
    /// suppressed attributes retyped as text so the output loads back.
    #[serde(default)]
    pub output_schema: Option<PathBuf>,
    #[serde(default)]
    pub steps: Vec<StepConfig>,
    /// Metrics to report on the transformed data.
    #[serde(default)]
    pub metrics: Option<MetricsConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    pub qi: Vec<String>,
    #[serde(default)]
    pub sensitive: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub op: String,
    #[serde(default)]
    pub attribute: Option<String>,
    #[serde(default)]
    pub attributes: Option<Vec<String>>,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PipelineConfig {
    /// Relative paths are taken relative to the directory holding the config.
    pub fn resolve_paths(&mut self, base: &Path) {
        let optional = self.output_schema.iter_mut();
        for p in [&mut self.input, &mut self.schema, &mut self.output]
            .into_iter()
            .chain(optional)
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseParams {
    #[serde(default)]
    distribution: Option<NoiseSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwapParams {
    swaps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RankSwapParams {
    p: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupParams {
    k: usize,
}

#[derive(Debug)]
pub enum Op {
    Suppress(Vec<String>),
    Generalize(GeneralizationRule),
    AddNoise { attribute: String, noise: NoiseSpec },
    Swap { attribute: String, swaps: usize },
    RankSwap { attribute: String, p: usize },
    Microaggregate { attribute: String, k: usize },
    Mdav { attributes: Vec<String>, k: usize },
}

impl Op {
    fn randomized(&self) -> bool {
        matches!(
            self,
            Op::AddNoise { .. } | Op::Swap { .. } | Op::RankSwap { .. }
        )
    }
}

#[derive(Debug)]
pub struct Step {
    pub name: String,
    pub op: Op,
    pub seed: Option<u64>,
}

fn step_error(index: usize, name: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("step {index} ({name}): {msg}"))
}

fn params<T: DeserializeOwned>(index: usize, step: &StepConfig) -> Result<T> {
    let value = match &step.params {
        Value::Null => Value::Object(Default::default()),
        v => v.clone(),
    };
    serde_json::from_value(value).map_err(|e| step_error(index, &step.op, format!("params: {e}")))
}

fn one_attribute(index: usize, step: &StepConfig) -> Result<String> {
    match (&step.attribute, &step.attributes) {
        (Some(a), None) => Ok(a.clone()),
        (None, Some(list)) if list.len() == 1 => Ok(list[0].clone()),
        _ => Err(step_error(
            index,
            &step.op,
            "expects exactly one `attribute`",
        )),
    }
}

fn attribute_list(index: usize, step: &StepConfig) -> Result<Vec<String>> {
    let list = match (&step.attribute, &step.attributes) {
        (Some(a), None) => vec![a.clone()],
        (None, Some(list)) => list.clone(),
        _ => {
            return Err(step_error(
                index,
                &step.op,
                "give either `attribute` or `attributes`",
            ))
        }
    };
    if list.is_empty() {
        return Err(step_error(index, &step.op, "`attributes` is empty"));
    }
    Ok(list)
}

/// Resolves each step's op name and typed parameters.
pub fn parse_steps(configs: &[StepConfig]) -> Result<Vec<Step>> {
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let op = match c.op.as_str() {
                "suppress" => Op::Suppress(attribute_list(i, c)?),
                "generalize" => {
                    let strategy: Strategy = params(i, c)?;
                    Op::Generalize(GeneralizationRule {
                        attribute: one_attribute(i, c)?,
                        strategy,
                    })
                }
                "add_noise" => {
                    let p: NoiseParams = params(i, c)?;
                    Op::AddNoise {
                        attribute: one_attribute(i, c)?,
                        noise: p.distribution.unwrap_or_else(NoiseSpec::plus_minus_two),
                    }
                }
                "swap" => Op::Swap {
                    attribute: one_attribute(i, c)?,
                    swaps: params::<SwapParams>(i, c)?.swaps,
                },
                "rank_swap" => Op::RankSwap {
                    attribute: one_attribute(i, c)?,
                    p: params::<RankSwapParams>(i, c)?.p,
                },
                "microaggregate" => Op::Microaggregate {
                    attribute: one_attribute(i, c)?,
                    k: params::<GroupParams>(i, c)?.k,
                },
                "mdav" => Op::Mdav {
                    attributes: attribute_list(i, c)?,
                    k: params::<GroupParams>(i, c)?.k,
                },
                other => return Err(step_error(i, other, "unknown op")),
            };
            Ok(Step {
                name: c.op.clone(),
                op,
                seed: c.seed,
            })
        })
        .collect()
}

/// What an attribute's cells look like at some point in the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Integer,
    Text,
    /// Generalized or suppressed: no longer usable by value-based steps.
    Coarsened,
}

/// Checks every step against the dataset before anything runs, tracking how
/// earlier steps change the attributes later steps read.
pub fn validate(steps: &[Step], dataset: &Dataset, global_seed: Option<u64>) -> Result<()> {
    let mut forms: HashMap<String, Form> = dataset
        .schema()
        .attributes()
        .iter()
        .map(|a| {
            let form = match a.kind {
                Kind::Integer => Form::Integer,
                Kind::Text => Form::Text,
            };
            (a.name.clone(), form)
        })
        .collect();
    let n = dataset.len();

    for (i, step) in steps.iter().enumerate() {
        let fail = |msg: String| step_error(i, &step.name, msg);
        let form_of = |forms: &HashMap<String, Form>, a: &str| {
            forms
                .get(a)
                .copied()
                .ok_or_else(|| fail(format!("unknown attribute `{a}`")))
        };
        let need_integer = |forms: &HashMap<String, Form>, a: &str| match form_of(forms, a)? {
            Form::Integer => Ok(()),
            Form::Text => Err(fail(format!("attribute `{a}` is text, needs integers"))),
            Form::Coarsened => Err(fail(format!(
                "attribute `{a}` was generalized or suppressed by an earlier step"
            ))),
        };
        if step.op.randomized() && step.seed.is_none() && global_seed.is_none() {
            return Err(CliError::Usage(format!(
                "step {i} ({}) is randomized and has no `seed`; add one or pass --seed",
                step.name
            )));
        }
        let mut coarsened = Vec::new();
        match &step.op {
            Op::Suppress(attrs) => {
                for a in attrs {
                    form_of(&forms, a)?;
                    coarsened.push(a.clone());
                }
            }
            Op::Generalize(rule) => {
                let a = rule.attribute.as_str();
                let form = form_of(&forms, a)?;
                match (&rule.strategy, form) {
                    (Strategy::NumericBins { width, .. }, _) if *width < 1 => {
                        return Err(fail(format!("bin width must be at least 1, got {width}")))
                    }
                    (Strategy::NumericBins { .. }, Form::Integer)
                    | (Strategy::TextPrefix { .. }, Form::Text)
                    | (Strategy::SuppressAll, _) => {}
                    (Strategy::NumericBins { .. }, _) => {
                        return Err(fail(format!(
                            "numeric bins need integer attribute, `{a}` is not"
                        )))
                    }
                    (Strategy::TextPrefix { .. }, _) => {
                        return Err(fail(format!(
                            "text prefix needs text attribute, `{a}` is not"
                        )))
                    }
                }
                if let Strategy::TextPrefix { keep: 0 } = rule.strategy {
                    return Err(fail("prefix length must be at least 1".into()));
                }
                coarsened.push(a.to_owned());
            }
            Op::AddNoise { attribute, .. } => need_integer(&forms, attribute)?,
            Op::Swap { attribute, swaps } => {
                form_of(&forms, attribute)?;
                if *swaps > n / 2 {
                    return Err(fail(format!(
                        "{swaps} swaps need {} records, dataset has {n}",
                        swaps * 2
                    )));
                }
            }
            Op::RankSwap { attribute, p } => {
                need_integer(&forms, attribute)?;
                if *p == 0 {
                    return Err(fail("rank distance p must be at least 1".into()));
                }
            }
            Op::Microaggregate { attribute, k } => {
                need_integer(&forms, attribute)?;
                check_group_size(*k, n).map_err(fail)?;
            }
            Op::Mdav { attributes, k } => {
                for a in attributes {
                    if form_of(&forms, a)? == Form::Coarsened {
                        return Err(fail(format!(
                            "attribute `{a}` was generalized or suppressed by an earlier step"
                        )));
                    }
                }
                check_group_size(*k, n).map_err(fail)?;
            }
        }
        for a in coarsened {
            forms.insert(a, Form::Coarsened);
        }
    }
    Ok(())
}

fn check_group_size(k: usize, n: usize) -> std::result::Result<(), String> {
    if k < 2 {
        return Err(format!("group size k must be at least 2, got {k}"));
    }
    if n > 0 && n < k {
        return Err(format!("group size {k} exceeds the {n} records"));
    }
    Ok(())
}

/// The input schema with every generalized or suppressed attribute retyped
/// as text.
pub fn output_schema(steps: &[Step], schema: &Schema) -> Schema {
    let coarsened: Vec<&str> = steps
        .iter()
        .flat_map(|s| match &s.op {
            Op::Suppress(attrs) => attrs.iter().map(String::as_str).collect(),
            Op::Generalize(rule) => vec![rule.attribute.as_str()],
            _ => Vec::new(),
        })
        .collect();
    let attributes = schema
        .attributes()
        .iter()
        .map(|a| {
            let mut a = a.clone();
            if coarsened.contains(&a.name.as_str()) {
                a.kind = Kind::Text;
            }
            a
        })
        .collect();
    Schema::new(attributes).expect("names unchanged")
}

/// Step `i`'s generator: its own seed if given, otherwise stream `i` of the
/// global seed.
fn step_rng(step: &Step, index: usize, global_seed: Option<u64>) -> ChaCha20Rng {
    match (step.seed, global_seed) {
        (Some(seed), _) => ChaCha20Rng::seed_from_u64(seed),
        (None, Some(seed)) => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            rng
        }
        (None, None) => unreachable!("validated before running"),
    }
}

pub fn run_steps(
    steps: &[Step],
    mut dataset: Dataset,
    global_seed: Option<u64>,
) -> Result<Dataset> {
    for (i, step) in steps.iter().enumerate() {
        log::info!("step {i}: {}", step.name);
        let wrap = |e: privkit_core::AnonymizeError| step_error(i, &step.name, e);
        dataset = match &step.op {
            Op::Suppress(attrs) => {
                let names: Vec<&str> = attrs.iter().map(String::as_str).collect();
                suppress(&dataset, &names).map_err(wrap)?
            }
            Op::Generalize(rule) => {
                generalize(&dataset, std::slice::from_ref(rule)).map_err(wrap)?
            }
            Op::AddNoise { attribute, noise } => add_noise(
                &dataset,
                attribute,
                noise,
                &mut step_rng(step, i, global_seed),
            )
            .map_err(wrap)?,
            Op::Swap { attribute, swaps } => swap_values(
                &dataset,
                attribute,
                *swaps,
                &mut step_rng(step, i, global_seed),
            )
            .map_err(wrap)?,
            Op::RankSwap { attribute, p } => {
                rank_swap(&dataset, attribute, *p, &mut step_rng(step, i, global_seed))
                    .map_err(wrap)?
            }
            Op::Microaggregate { attribute, k } => {
                microaggregate_univariate(&dataset, attribute, *k).map_err(wrap)?
            }
            Op::Mdav { attributes, k } => {
                let names: Vec<&str> = attributes.iter().map(String::as_str).collect();
                microaggregate_multivariate(&dataset, &names, *k).map_err(wrap)?
            }
        };
    }
    Ok(dataset)
}
