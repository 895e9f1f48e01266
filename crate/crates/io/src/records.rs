//! JSONL persistence for score reports and evaluation records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sindex_core::{EvalRecord, Measure, ScoreReport};

use crate::error::{Error, Result};

/// Flat per-question score output. Scalar measures not requested are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sindex: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_entropy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub naive_entropy: Option<f64>,
    pub proportions: Vec<f64>,
    pub adjusted_proportions: Vec<f64>,
}

impl ScoreRecord {
    pub fn new(id: impl Into<String>, report: &ScoreReport, measures: &[Measure]) -> Self {
        let pick = |m: Measure| measures.contains(&m).then(|| report.get(m));
        ScoreRecord {
            id: id.into(),
            k: report.k,
            sindex: pick(Measure::Sindex),
            cluster_entropy: pick(Measure::ClusterEntropy),
            naive_entropy: pick(Measure::NaiveEntropy),
            proportions: report.proportions.clone(),
            adjusted_proportions: report.adjusted_proportions.clone(),
        }
    }
}

pub fn write_jsonl<T: Serialize>(mut w: impl Write, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn load_eval_records(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<EvalRecord> = read_jsonl(BufReader::new(file))?;
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

pub fn write_eval_records(path: impl AsRef<Path>, records: &[EvalRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl(BufWriter::new(file), records).map_err(|e| Error::io(path, e))
}
