use serde::{Deserialize, Serialize};

use super::{column_index, AnonymizeError};
use crate::dataset::{Dataset, Kind, Value};

/// How a single column is coarsened.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    /// Integer `x` becomes `[lo, lo + width - 1]` with
    /// `lo = origin + width * floor((x - origin) / width)`.
    NumericBins {
        width: i64,
        #[serde(default)]
        origin: i64,
    },
    /// Text keeps only its first `keep` characters.
    TextPrefix {
        keep: usize,
    },
    SuppressAll,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizationRule {
    pub attribute: String,
    #[serde(flatten)]
    pub strategy: Strategy,
}

impl GeneralizationRule {
    pub fn numeric_bins(attribute: impl Into<String>, width: i64, origin: i64) -> Self {
        Self {
            attribute: attribute.into(),
            strategy: Strategy::NumericBins { width, origin },
        }
    }

    pub fn text_prefix(attribute: impl Into<String>, keep: usize) -> Self {
        Self {
            attribute: attribute.into(),
            strategy: Strategy::TextPrefix { keep },
        }
    }

    pub fn suppress_all(attribute: impl Into<String>) -> Self {
        Self {
            attribute: attribute.into(),
            strategy: Strategy::SuppressAll,
        }
    }

    /// Checks the rule against the dataset without transforming it.
    pub fn validate(&self, dataset: &Dataset) -> Result<usize, AnonymizeError> {
        let index = column_index(dataset, &self.attribute)?;
        let kind = dataset.schema().attributes()[index].kind;
        let mismatch = |expected| AnonymizeError::KindMismatch {
            attribute: self.attribute.clone(),
            expected,
            found: kind.to_string(),
        };
        match self.strategy {
            Strategy::NumericBins { width, .. } => {
                if kind != Kind::Integer {
                    return Err(mismatch(Kind::Integer));
                }
                if width < 1 {
                    return Err(AnonymizeError::InvalidRule {
                        attribute: self.attribute.clone(),
                        reason: format!("bin width must be at least 1, got {width}"),
                    });
                }
            }
            Strategy::TextPrefix { keep } => {
                if kind != Kind::Text {
                    return Err(mismatch(Kind::Text));
                }
                let shortest = dataset
                    .records()
                    .iter()
                    .filter_map(|r| r[index].as_text())
                    .map(|t| t.chars().count())
                    .min();
                if let Some(shortest) = shortest {
                    if keep >= shortest {
                        return Err(AnonymizeError::InvalidRule {
                            attribute: self.attribute.clone(),
                            reason: format!(
                                "prefix length {keep} does not hide anything (shortest value has {shortest} characters)"
                            ),
                        });
                    }
                }
            }
            Strategy::SuppressAll => {}
        }
        Ok(index)
    }

    fn apply(&self, value: &Value) -> Result<Value, AnonymizeError> {
        let wrong_form = || AnonymizeError::KindMismatch {
            attribute: self.attribute.clone(),
            expected: match self.strategy {
                Strategy::TextPrefix { .. } => Kind::Text,
                _ => Kind::Integer,
            },
            found: value.form().to_owned(),
        };
        match (&self.strategy, value) {
            (Strategy::SuppressAll, _) | (_, Value::Suppressed) => Ok(Value::Suppressed),
            (&Strategy::NumericBins { width, origin }, &Value::Integer(x)) => {
                let (w, o) = (width as i128, origin as i128);
                let lo = o + w * (x as i128 - o).div_euclid(w);
                let hi = lo + w - 1;
                let overflow = || AnonymizeError::Overflow(self.attribute.clone());
                Ok(Value::Interval {
                    lo: i64::try_from(lo).map_err(|_| overflow())?,
                    hi: i64::try_from(hi).map_err(|_| overflow())?,
                })
            }
            (&Strategy::TextPrefix { keep }, Value::Text(t)) => {
                Ok(Value::MaskedText(t.chars().take(keep).collect()))
            }
            _ => Err(wrong_form()),
        }
    }
}

/// Replaces every value of the named columns with [`Value::Suppressed`].
pub fn suppress(dataset: &Dataset, attributes: &[&str]) -> Result<Dataset, AnonymizeError> {
    let rules: Vec<_> = attributes
        .iter()
        .map(|&a| GeneralizationRule::suppress_all(a))
        .collect();
    generalize(dataset, &rules)
}

/// Applies the rules in order. All rules are validated before any cell
/// changes.
pub fn generalize(
    dataset: &Dataset,
    rules: &[GeneralizationRule],
) -> Result<Dataset, AnonymizeError> {
    let mut current = dataset.clone();
    for rule in rules {
        let index = rule.validate(&current)?;
        let column = current
            .records()
            .iter()
            .map(|r| rule.apply(&r[index]))
            .collect::<Result<Vec<_>, _>>()?;
        current = current.with_column(index, column);
    }
    Ok(current)
}
