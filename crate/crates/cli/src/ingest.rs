//! `value,group` CSV input.

use std::io::Read;
use std::path::Path;

use hetci::{GroupedSample, SingletonPolicy};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DataFileRecord {
    pub value: f64,
    pub group: String,
}

/// An ingested sample with the labels it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub sample: GroupedSample,
    pub group_labels: Vec<String>,
    /// Labels of singleton rows removed under the drop policy.
    pub dropped: Vec<String>,
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<DataFileRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Validation(format!("cannot read header: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "value" || &headers[1] != "group" {
        return Err(CliError::Validation(format!(
            "expected header 'value,group', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Validation(format!("parse error: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 {
            return Err(CliError::Validation(format!(
                "line {line}: expected 2 fields, found {}",
                row.len()
            )));
        }
        let value: f64 = row[0].parse().map_err(|_| {
            CliError::Validation(format!("line {line}: '{}' is not a number", &row[0]))
        })?;
        if !value.is_finite() {
            return Err(CliError::Validation(format!(
                "line {line}: value '{}' is not finite",
                &row[0]
            )));
        }
        if row[1].is_empty() {
            return Err(CliError::Validation(format!("line {line}: empty group label")));
        }
        records.push(DataFileRecord {
            value,
            group: row[1].to_string(),
        });
    }
    Ok(records)
}

pub fn build_sample(records: Vec<DataFileRecord>, policy: SingletonPolicy) -> Result<Ingested> {
    if records.is_empty() {
        return Err(CliError::Validation("input has no data rows".into()));
    }
    if records.len() < 2 {
        return Err(CliError::Validation("input needs at least 2 data rows".into()));
    }
    let (values, labels): (Vec<f64>, Vec<String>) =
        records.into_iter().map(|r| (r.value, r.group)).unzip();
    let labeled = GroupedSample::from_labels(values, &labels, policy)?;
    Ok(Ingested {
        sample: labeled.sample,
        group_labels: labeled.group_labels,
        dropped: labeled.dropped,
    })
}

pub fn ingest_reader<R: Read>(reader: R, policy: SingletonPolicy) -> Result<Ingested> {
    build_sample(read_records(reader)?, policy)
}

pub fn ingest(path: &Path, policy: SingletonPolicy) -> Result<Ingested> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, policy)
}

/// Writes a sample back out as `value,group`, labels indexed by group id.
pub fn write_sample_csv(sample: &GroupedSample, labels: &[String]) -> String {
    let mut out = String::from("value,group\n");
    for (&v, &j) in sample.values().iter().zip(sample.group_of()) {
        out.push_str(&format!("{v},{}\n", quote(&labels[j])));
    }
    out
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '#']) || field.trim() != field {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
