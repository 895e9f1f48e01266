//! Domain types shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Separator placed between question and answer in representative strings.
pub const DEFAULT_SEPARATOR: &str = " [SEP] ";

/// A question with its sampled answers.
///
/// Answer order is significant: cluster assignments, embedding rows and labels
/// all index into `answers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub id: String,
    pub question: String,
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_answer: Option<String>,
}

impl ResponseSet {
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        answers: Vec<String>,
        canonical_answer: Option<String>,
    ) -> Result<Self> {
        let rs = ResponseSet {
            id: id.into(),
            question: question.into(),
            answers,
            canonical_answer,
        };
        rs.validate()?;
        Ok(rs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.question.trim().is_empty() {
            return Err(Error::MalformedInput(format!(
                "question {} is empty",
                self.id
            )));
        }
        if self.answers.is_empty() {
            return Err(Error::MalformedInput(format!(
                "question {} has no answers",
                self.id
            )));
        }
        if let Some(i) = self.answers.iter().position(|a| a.trim().is_empty()) {
            return Err(Error::MalformedInput(format!(
                "question {} has an empty answer at index {i}",
                self.id
            )));
        }
        Ok(())
    }

    /// Number of sampled answers (P).
    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }

    /// Keep only the first `p` answers.
    pub fn truncated(&self, p: usize) -> Result<ResponseSet> {
        if p == 0 || p > self.answers.len() {
            return Err(Error::InsufficientGenerations {
                id: self.id.clone(),
                available: self.answers.len(),
                requested: p,
            });
        }
        Ok(ResponseSet {
            answers: self.answers[..p].to_vec(),
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeString {
    pub value: String,
    /// 1-based index of the answer this string was built from.
    pub source_index: usize,
}

/// Build `question + separator + answer` for every answer, in order.
pub fn build_representative_strings(
    rs: &ResponseSet,
    separator: &str,
) -> Result<Vec<RepresentativeString>> {
    rs.validate()?;
    Ok(rs
        .answers
        .iter()
        .enumerate()
        .map(|(i, answer)| RepresentativeString {
            value: format!("{}{}{}", rs.question, separator, answer),
            source_index: i + 1,
        })
        .collect())
}

/// P row vectors of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
    normalized: bool,
}

impl EmbeddingMatrix {
    /// Build from row vectors. Rejects empty input, ragged rows, zero rows and
    /// non-finite entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::MalformedInput("embedding matrix has no rows".into()))?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::MalformedInput("embedding dimension is zero".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::MalformedInput(format!(
                    "non-finite value in embedding row {i}"
                )));
            }
            if row.iter().all(|&x| x == 0.0) {
                return Err(Error::ZeroVector(i));
            }
            data.extend_from_slice(row);
        }
        Ok(EmbeddingMatrix {
            data,
            rows: rows.len(),
            dim,
            normalized: false,
        })
    }

    /// Same as [`from_rows`](Self::from_rows) followed by row normalization.
    pub fn from_rows_normalized<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Ok(Self::from_rows(rows)?.normalized())
    }

    /// Rows scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.dim) {
            let norm = math::norm(row);
            row.iter_mut().for_each(|x| *x /= norm);
        }
        EmbeddingMatrix {
            data,
            rows: self.rows,
            dim: self.dim,
            normalized: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// First `p` rows.
    pub fn truncated(&self, p: usize) -> Result<Self> {
        if p == 0 || p > self.rows {
            return Err(Error::SizeMismatch(format!(
                "cannot take {p} rows from a matrix with {}",
                self.rows
            )));
        }
        Ok(EmbeddingMatrix {
            data: self.data[..p * self.dim].to_vec(),
            rows: p,
            ..*self
        })
    }
}

/// Symmetric P × P cosine similarity matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Vec<f64>,
    size: usize,
}

impl SimilarityMatrix {
    /// Build from a dense square matrix. Entries are clamped to [-1, 1]; the
    /// diagonal is forced to 1 and the upper triangle is mirrored onto the
    /// lower one.
    pub fn from_dense<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::MalformedInput("similarity matrix is empty".into()));
        }
        let mut values = vec![0.0; size * size];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::MalformedInput(format!(
                        "non-finite similarity at ({i}, {j})"
                    )));
                }
                values[i * size + j] = v;
            }
        }
        let mut sm = SimilarityMatrix { values, size };
        for i in 0..size {
            sm.values[i * size + i] = 1.0;
            for j in i + 1..size {
                let v = sm.values[i * size + j].clamp(-1.0, 1.0);
                sm.values[i * size + j] = v;
                sm.values[j * size + i] = v;
            }
        }
        Ok(sm)
    }

    pub(crate) fn from_upper(size: usize, upper: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            values[i * size + i] = 1.0;
            for j in i + 1..size {
                let v = upper(i, j).clamp(-1.0, 1.0);
                values[i * size + j] = v;
                values[j * size + i] = v;
            }
        }
        SimilarityMatrix { values, size }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    /// Leading `p` × `p` block.
    pub fn truncated(&self, p: usize) -> Result<Self> {
        if p == 0 || p > self.size {
            return Err(Error::SizeMismatch(format!(
                "cannot take {p} rows from a {0}x{0} similarity matrix",
                self.size
            )));
        }
        Ok(Self::from_upper(p, |i, j| self.get(i, j)))
    }
}
