//! Readers for the JSON and CSV inputs shared by several subcommands.

use std::path::{Path, PathBuf};

use metamix::vectorize::MatrixRecords;
use metamix::{DatasetMatrix, DomainVector, Error, MixtureRatio, Result, TokenBudget};
use serde::de::DeserializeOwned;
use serde_json::Value;

pub fn json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::MalformedRecord {
        line: 1,
        reason: reason.into(),
    }
}

fn floats(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| malformed("expected an array of numbers"))
}

/// A dataset matrix file: `{"columns": [records]}` as written by `vectorize`,
/// or a bare array of columns.
pub fn matrix(path: &Path) -> Result<(DatasetMatrix, Option<Vec<String>>)> {
    let v: Value = json(path)?;
    if v.get("columns").is_some() {
        let records: MatrixRecords = serde_json::from_value(v)?;
        let names = records.names().iter().map(|s| s.to_string()).collect();
        return Ok((records.matrix()?, Some(names)));
    }
    let cols = v
        .as_array()
        .ok_or_else(|| malformed("matrix must be {\"columns\": [...]} or an array of columns"))?;
    let columns = cols
        .iter()
        .map(|c| DomainVector::from_input(&floats(c)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((DatasetMatrix::new(columns)?, None))
}

/// A domain vector: a bare array, or an object with a `"vector"` member.
pub fn vector(path: &Path) -> Result<DomainVector> {
    let v: Value = json(path)?;
    let raw = match v.get("vector") {
        Some(inner) => floats(inner)?,
        None => floats(&v)?,
    };
    DomainVector::from_input(&raw)
}

pub fn budget(path: &Path) -> Result<TokenBudget> {
    let b: TokenBudget = json(path)?;
    TokenBudget::new(b.total_tokens, b.dataset_tokens)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => malformed(format!("{other:?}")),
    }
}

/// Rows of `label,w0,w1,...`.
pub fn grid(path: &Path) -> Result<Vec<(String, MixtureRatio)>> {
    let mut out = Vec::new();
    for (i, row) in csv_reader(path)?.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let label = row.get(0).unwrap_or_default().to_string();
        let weights = row
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::MalformedRecord {
                line: i + 2,
                reason: e.to_string(),
            })?;
        out.push((label, MixtureRatio::from_input(&weights)?));
    }
    if out.is_empty() {
        return Err(malformed("grid has no rows"));
    }
    Ok(out)
}

/// Rows of `label,score`.
pub fn scores(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, row) in csv_reader(path)?.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        if row.len() < 2 {
            return Err(Error::MalformedRecord {
                line: i + 2,
                reason: "expected label,score".into(),
            });
        }
        let score = row[row.len() - 1]
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::MalformedRecord {
                line: i + 2,
                reason: e.to_string(),
            })?;
        out.push((row[0].to_string(), score));
    }
    Ok(out)
}

/// `[{"name", "path"}]` or `{name: path}`; relative paths resolve against the list file.
pub fn corpus_list(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let v: Value = json(path)?;
    let entries = match v {
        Value::Array(items) => items
            .iter()
            .map(|item| {
                let name = item.get("name").and_then(Value::as_str);
                let p = item.get("path").and_then(Value::as_str);
                match (name, p) {
                    (Some(n), Some(p)) => Ok((n.to_string(), resolve(p))),
                    _ => Err(malformed("corpus entries need \"name\" and \"path\"")),
                }
            })
            .collect::<Result<Vec<_>>>()?,
        Value::Object(map) => map
            .iter()
            .map(|(n, p)| {
                p.as_str()
                    .map(|p| (n.clone(), resolve(p)))
                    .ok_or_else(|| malformed("corpus map values must be paths"))
            })
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(malformed("corpus list must be an array or an object")),
    };
    if entries.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(entries)
}

pub fn stem(path: &Path) -> String {
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    name.trim_end_matches(".gz").trim_end_matches(".jsonl").to_string()
}
