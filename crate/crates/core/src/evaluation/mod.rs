//! Dataset-level evaluation: AUROC tables, ablation sweeps and runtime
//! benchmarks.

mod ablation;
mod auroc;
mod bench;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{cluster, Algorithm, DEFAULT_DISTANCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::labeling::Label;
use crate::measures::{self, Measure, ScoreReport};
use crate::types::{ResponseSet, SimilarityMatrix};

pub use ablation::{
    ablate_algorithm, ablate_generations, ablate_threshold, AblationRow, AblationTable,
    DEFAULT_GENERATION_SWEEP, DEFAULT_SIMILARITY_SWEEP,
};
pub use auroc::auroc;
pub use bench::{
    bench_clustering, fit_exponent, mock_nli_cluster, random_unit_vectors, BenchAlgorithm,
    BenchConfig, BenchSample, MockNli, NliLatency,
};

/// Per-question scores plus the binary label (1 = hallucination).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub question_id: String,
    pub scores: BTreeMap<String, f64>,
    pub label: u8,
}

impl EvalRecord {
    pub fn from_report(
        question_id: impl Into<String>,
        report: &ScoreReport,
        measures: &[Measure],
        label: Label,
    ) -> Self {
        EvalRecord {
            question_id: question_id.into(),
            scores: measures
                .iter()
                .map(|&m| (m.name().to_string(), report.get(m)))
                .collect(),
            label: label.as_binary(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label > 1 {
            return Err(Error::MalformedInput(format!(
                "record {}: label must be 0 or 1, got {}",
                self.question_id, self.label
            )));
        }
        if let Some((name, _)) = self.scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::MalformedInput(format!(
                "record {}: score {name} is not finite",
                self.question_id
            )));
        }
        Ok(())
    }

    pub fn is_hallucination(&self) -> bool {
        self.label == 1
    }
}

/// Measure name → AUROC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AurocTable {
    pub auroc: BTreeMap<String, f64>,
    pub questions: usize,
    pub hallucinations: usize,
}

impl AurocTable {
    pub fn get(&self, measure: &str) -> Option<f64> {
        self.auroc.get(measure).copied()
    }

    /// Measure with the highest AUROC (first by name on ties).
    pub fn best(&self) -> Option<(&str, f64)> {
        self.auroc
            .iter()
            .fold(None, |best: Option<(&str, f64)>, (name, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((name.as_str(), v)),
            })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure,auroc\n");
        for (name, v) in &self.auroc {
            let _ = writeln!(out, "{name},{v:.6}");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.auroc.keys().map(String::len).max().unwrap_or(0).max(7);
        let best = self.best().map(|(n, _)| n.to_string());
        let mut out = format!(
            "{:<width$}  {:>6}   (n={}, hallucinated={})\n",
            "measure", "AUROC", self.questions, self.hallucinations
        );
        for (name, v) in &self.auroc {
            let mark = if best.as_deref() == Some(name.as_str()) {
                " *"
            } else {
                ""
            };
            let _ = writeln!(out, "{name:<width$}  {v:>6.3}{mark}");
        }
        out
    }
}

/// AUROC of every measure present in the records.
///
/// All records must carry the same measure names.
pub fn evaluate(records: &[EvalRecord]) -> Result<AurocTable> {
    let first = records
        .first()
        .ok_or_else(|| Error::UndefinedAuroc("no records".into()))?;
    for r in records {
        r.validate()?;
        if r.scores.len() != first.scores.len()
            || !r.scores.keys().all(|k| first.scores.contains_key(k))
        {
            return Err(Error::MalformedInput(format!(
                "record {} does not carry the same measures as record {}",
                r.question_id, first.question_id
            )));
        }
    }
    let labels: Vec<bool> = records.iter().map(EvalRecord::is_hallucination).collect();
    let mut auroc_by_measure = BTreeMap::new();
    for name in first.scores.keys() {
        let scores: Vec<f64> = records.iter().map(|r| r.scores[name]).collect();
        auroc_by_measure.insert(name.clone(), auroc(&scores, &labels)?);
    }
    Ok(AurocTable {
        auroc: auroc_by_measure,
        questions: records.len(),
        hallucinations: labels.iter().filter(|&&l| l).count(),
    })
}

/// Clustering settings applied to every question.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    /// Distance threshold.
    pub threshold: f64,
    pub algorithm: Algorithm,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            threshold: DEFAULT_DISTANCE_THRESHOLD,
            algorithm: Algorithm::HacAverage,
        }
    }
}

/// A question whose embeddings have already been reduced to similarities.
///
/// Ablations re-cluster from the cached similarity matrix instead of
/// re-embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedQuestion {
    pub responses: ResponseSet,
    pub similarity: SimilarityMatrix,
    pub label: Label,
}

impl PreparedQuestion {
    pub fn new(responses: ResponseSet, similarity: SimilarityMatrix, label: Label) -> Result<Self> {
        if responses.len() != similarity.size() {
            return Err(Error::SizeMismatch(format!(
                "question {}: {} answers but {}x{} similarity matrix",
                responses.id,
                responses.len(),
                similarity.size(),
                similarity.size()
            )));
        }
        Ok(PreparedQuestion {
            responses,
            similarity,
            label,
        })
    }

    pub fn score(&self, cfg: &ScoringConfig) -> Result<ScoreReport> {
        let c = cluster(&self.similarity, cfg.threshold, cfg.algorithm)?;
        measures::score(&self.responses, &c, &self.similarity)
    }

    /// Keep the first `p` answers.
    pub fn truncated(&self, p: usize) -> Result<Self> {
        Ok(PreparedQuestion {
            responses: self.responses.truncated(p)?,
            similarity: self.similarity.truncated(p)?,
            label: self.label,
        })
    }
}

/// Score every question (in parallel) and return records in corpus order.
pub fn score_corpus(
    corpus: &[PreparedQuestion],
    cfg: &ScoringConfig,
    measures: &[Measure],
) -> Result<Vec<EvalRecord>> {
    corpus
        .par_iter()
        .map(|q| {
            let report = q.score(cfg)?;
            Ok(EvalRecord::from_report(
                q.responses.id.clone(),
                &report,
                measures,
                q.label,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, sindex: f64, naive: f64, label: u8) -> EvalRecord {
        EvalRecord {
            question_id: id.into(),
            scores: BTreeMap::from([("sindex".into(), sindex), ("naive_entropy".into(), naive)]),
            label,
        }
    }

    #[test]
    fn evaluate_table() {
        let records = vec![
            record("a", 1.2, 0.3, 1),
            record("b", 0.1, 0.3, 0),
            record("c", 0.9, 0.3, 1),
            record("d", 0.0, 0.3, 0),
        ];
        let table = evaluate(&records).unwrap();
        assert_eq!(table.get("sindex"), Some(1.0));
        assert_eq!(table.get("naive_entropy"), Some(0.5));
        assert_eq!(table.best(), Some(("sindex", 1.0)));
        assert_eq!(table.hallucinations, 2);
        assert_eq!(
            table.to_csv(),
            "measure,auroc\nnaive_entropy,0.500000\nsindex,1.000000\n"
        );
        assert!(table.to_text().contains("sindex"));

        let mut shuffled = records.clone();
        shuffled.reverse();
        assert_eq!(evaluate(&shuffled).unwrap(), table);
    }

    #[test]
    fn evaluate_errors() {
        assert!(evaluate(&[]).is_err());
        let single = vec![record("a", 1.0, 0.0, 1), record("b", 0.5, 0.0, 1)];
        assert!(matches!(evaluate(&single), Err(Error::UndefinedAuroc(_))));
        let mut missing = vec![record("a", 1.0, 0.0, 1), record("b", 0.5, 0.0, 0)];
        missing[1].scores.remove("naive_entropy");
        assert!(evaluate(&missing).is_err());
        let bad_label = vec![record("a", 1.0, 0.0, 2), record("b", 0.5, 0.0, 0)];
        assert!(evaluate(&bad_label).is_err());
    }
}
