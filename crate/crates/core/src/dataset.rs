//! Role-annotated tabular records.
//!
//! A [`Dataset`] is an explicit [`Schema`] plus rows of [`Value`]s. Transforms
//! never mutate a dataset in place; they return a new one.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("header mismatch: expected [{expected}], found [{found}]")]
    HeaderMismatch { expected: String, found: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    ArityError {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column `{column}`: cannot parse `{text}` as an integer")]
    ParseError {
        row: usize,
        column: String,
        text: String,
    },
    #[error("duplicate attribute name `{0}` in schema")]
    DuplicateAttribute(String),
    #[error("record {row} has {found} values, schema has {expected} attributes")]
    RecordArity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid schema document: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Privacy role of an attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeRole {
    ExplicitIdentifier,
    QuasiIdentifier,
    Sensitive,
    NonSensitive,
}

/// Declared type of an attribute's raw values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Text,
    Integer,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Text => f.write_str("text"),
            Kind::Integer => f.write_str("integer"),
        }
    }
}

/// A single cell, either raw or in a generalized/suppressed form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Text(String),
    Integer(i64),
    /// Closed range `lo..=hi`.
    Interval {
        lo: i64,
        hi: i64,
    },
    /// Prefix of a longer text with the remainder hidden.
    MaskedText(String),
    Suppressed,
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Value::Integer(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Short name of the variant, used in error messages.
    pub fn form(&self) -> &'static str {
        match self {
            Value::Text(_) => "text",
            Value::Integer(_) => "integer",
            Value::Interval { .. } => "interval",
            Value::MaskedText(_) => "masked text",
            Value::Suppressed => "suppressed",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => f.write_str(s),
            Value::Integer(x) => write!(f, "{x}"),
            Value::Interval { lo, hi } => write!(f, "{lo}-{hi}"),
            Value::MaskedText(prefix) => write!(f, "{prefix}*"),
            Value::Suppressed => f.write_str("*"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub role: AttributeRole,
    pub kind: Kind,
}

impl Attribute {
    pub fn new(name: impl Into<String>, role: AttributeRole, kind: Kind) -> Self {
        Self {
            name: name.into(),
            role,
            kind,
        }
    }
}

/// Ordered attribute list with unique names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Schema {
    attributes: Vec<Attribute>,
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for attr in &attributes {
            if !seen.insert(attr.name.as_str()) {
                return Err(DatasetError::DuplicateAttribute(attr.name.clone()));
            }
        }
        Ok(Self { attributes })
    }

    /// Parses the JSON form: a list of `{name, role, kind}` objects.
    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let attributes: Vec<Attribute> = serde_json::from_str(text)?;
        Self::new(attributes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.attributes).expect("schema serializes")
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    /// Names of all attributes carrying `role`, in schema order.
    pub fn with_role(&self, role: AttributeRole) -> Vec<&str> {
        self.attributes
            .iter()
            .filter(|a| a.role == role)
            .map(|a| a.name.as_str())
            .collect()
    }
}

impl<'de> Deserialize<'de> for Schema {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let attributes = Vec::<Attribute>::deserialize(de)?;
        Schema::new(attributes).map_err(serde::de::Error::custom)
    }
}

pub type Record = Vec<Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    schema: Schema,
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: Schema, records: Vec<Record>) -> Result<Self, DatasetError> {
        for (row, record) in records.iter().enumerate() {
            if record.len() != schema.len() {
                return Err(DatasetError::RecordArity {
                    row: row + 1,
                    expected: schema.len(),
                    found: record.len(),
                });
            }
        }
        Ok(Self { schema, records })
    }

    pub fn empty(schema: Schema) -> Self {
        Self {
            schema,
            records: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Clone of one column, in record order.
    pub fn column(&self, index: usize) -> Vec<Value> {
        self.records.iter().map(|r| r[index].clone()).collect()
    }

    /// Returns a copy with column `index` replaced by `values`.
    pub(crate) fn with_column(&self, index: usize, values: Vec<Value>) -> Dataset {
        debug_assert_eq!(values.len(), self.records.len());
        let records = self
            .records
            .iter()
            .zip(values)
            .map(|(record, value)| {
                let mut record = record.clone();
                record[index] = value;
                record
            })
            .collect();
        Dataset {
            schema: self.schema.clone(),
            records,
        }
    }
}

/// Reads a headed CSV whose header must equal the schema's names in order.
pub fn load_csv<R: Read>(source: R, schema: &Schema) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);

    let header = reader.headers()?.clone();
    if !header.iter().eq(schema.names()) {
        return Err(DatasetError::HeaderMismatch {
            expected: schema.names().collect::<Vec<_>>().join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let row_number = i + 1;
        if row.len() != schema.len() {
            return Err(DatasetError::ArityError {
                row: row_number,
                expected: schema.len(),
                found: row.len(),
            });
        }
        let record = row
            .iter()
            .zip(schema.attributes())
            .map(|(cell, attr)| match attr.kind {
                Kind::Text => Ok(Value::Text(cell.to_owned())),
                Kind::Integer => cell.trim().parse::<i64>().map(Value::Integer).map_err(|_| {
                    DatasetError::ParseError {
                        row: row_number,
                        column: attr.name.clone(),
                        text: cell.to_owned(),
                    }
                }),
            })
            .collect::<Result<Record, _>>()?;
        records.push(record);
    }

    Ok(Dataset {
        schema: schema.clone(),
        records,
    })
}

pub fn write_csv<W: Write>(dataset: &Dataset, sink: W) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(dataset.schema.names())?;
    for record in &dataset.records {
        writer.write_record(record.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv_string(dataset: &Dataset) -> String {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn medical_records_schema() -> Schema {
    use AttributeRole::*;
    Schema::new(vec![
        Attribute::new("Name", ExplicitIdentifier, Kind::Text),
        Attribute::new("Age", QuasiIdentifier, Kind::Integer),
        Attribute::new("Gender", QuasiIdentifier, Kind::Text),
        Attribute::new("ZIP", QuasiIdentifier, Kind::Text),
        Attribute::new("Diagnosis", Sensitive, Kind::Text),
    ])
    .expect("fixture schema is valid")
}

const TABLE1_ROWS: [(&str, i64, &str, &str, &str); 10] = [
    ("Jane Doe", 44, "Female", "12345", "Cancer"),
    ("John Smith", 22, "Male", "12333", "Migraine"),
    ("William Wonker", 39, "Male", "12344", "Incontinence"),
    ("Harrison Seat", 35, "Male", "12355", "Incontinence"),
    ("Bettina Wonker", 42, "Female", "12344", "No illness"),
    ("Thomas Müller", 22, "Male", "12222", "Diabetes"),
    ("Sharon Carter", 47, "Female", "12544", "Cancer"),
    ("Maria Granger", 27, "Female", "12345", "Cancer"),
    ("Christian Cloud", 26, "Male", "12333", "No illness"),
    ("Kim Schmidt", 21, "Female", "12222", "Diabetes"),
];

/// The ten-row fictional medical record used throughout the worked examples.
pub fn medical_records() -> Dataset {
    let records = TABLE1_ROWS
        .iter()
        .map(|&(name, age, gender, zip, diagnosis)| {
            vec![
                Value::text(name),
                Value::Integer(age),
                Value::text(gender),
                Value::text(zip),
                Value::text(diagnosis),
            ]
        })
        .collect();
    Dataset::new(medical_records_schema(), records).expect("fixture rows match schema")
}
