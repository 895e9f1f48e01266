//! Line-delimited JSON datasets: one question with its sampled answers per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sindex_core::{EmbeddingMatrix, ResponseSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub question: String,
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_answer: Option<String>,
    /// Open-book passage, carried through untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    /// Precomputed answer embeddings, one per answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<Vec<Vec<f64>>>,
    /// Precomputed embedding of the canonical answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_embedding: Option<Vec<f64>>,
}

impl DatasetRecord {
    /// Schema checks beyond what deserialization enforces.
    pub fn validate(&self, line: usize) -> Result<()> {
        let schema = |field, message: String| Error::Schema {
            line,
            field,
            message,
        };
        if self.id.is_empty() {
            return Err(schema("id", "must not be empty".into()));
        }
        if self.question.trim().is_empty() {
            return Err(schema("question", "must not be empty".into()));
        }
        if self.answers.is_empty() {
            return Err(schema("answers", "must not be empty".into()));
        }
        if let Some(i) = self.answers.iter().position(|a| a.trim().is_empty()) {
            return Err(schema("answers", format!("answer {i} is empty")));
        }
        if let Some(e) = &self.embeddings {
            if e.len() != self.answers.len() {
                return Err(schema(
                    "embeddings",
                    format!("{} vectors for {} answers", e.len(), self.answers.len()),
                ));
            }
            let dim = e[0].len();
            if dim == 0 || e.iter().any(|v| v.len() != dim) {
                return Err(schema(
                    "embeddings",
                    "vectors must share one non-zero dimension".into(),
                ));
            }
            if let Some(i) = e.iter().position(|v| v.iter().all(|&x| x == 0.0)) {
                return Err(schema("embeddings", format!("vector {i} is zero")));
            }
            if let Some(c) = &self.canonical_embedding {
                if c.len() != dim {
                    return Err(schema(
                        "canonical_embedding",
                        format!("dimension {} does not match answers ({dim})", c.len()),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn response_set(&self) -> Result<ResponseSet> {
        Ok(ResponseSet::new(
            self.id.clone(),
            self.question.clone(),
            self.answers.clone(),
            self.canonical_answer.clone(),
        )?)
    }

    pub fn inline_embeddings(&self) -> Result<Option<EmbeddingMatrix>> {
        self.embeddings
            .as_ref()
            .map(|rows| EmbeddingMatrix::from_rows_normalized(rows).map_err(Error::from))
            .transpose()
    }
}

pub fn parse_dataset(reader: impl BufRead) -> Result<Vec<DatasetRecord>> {
    let mut records = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        record.validate(line_no)?;
        records.push(record);
    }
    Ok(records)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(BufReader::new(file))
}

pub fn write_dataset_to(mut w: impl Write, records: &[DatasetRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[DatasetRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_to(BufWriter::new(file), records).map_err(|e| Error::io(path, e))
}
