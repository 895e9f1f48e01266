use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{evaluate, score_corpus, PreparedQuestion, ScoringConfig};
use crate::clustering::{distance, Algorithm};
use crate::error::{Error, Result};
use crate::measures::Measure;

/// Cosine similarity cut-offs swept by default, including one above 0.95.
pub const DEFAULT_SIMILARITY_SWEEP: [f64; 6] = [0.70, 0.80, 0.85, 0.90, 0.95, 0.99];

pub const DEFAULT_GENERATION_SWEEP: [usize; 7] = [2, 4, 6, 8, 10, 12, 14];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub setting: String,
    pub auroc: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    /// Name of the swept parameter, e.g. `similarity_threshold`.
    pub parameter: String,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, setting: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.setting == setting)
    }

    pub fn auroc(&self, setting: &str, measure: Measure) -> Option<f64> {
        self.row(setting)?.auroc.get(measure.name()).copied()
    }

    fn measure_names(&self) -> Vec<&str> {
        self.rows
            .first()
            .map(|r| r.auroc.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn to_csv(&self) -> String {
        let names = self.measure_names();
        let mut out = self.parameter.clone();
        for n in &names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.setting);
            for n in &names {
                let _ = write!(out, ",{:.6}", row.auroc[*n]);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let names = self.measure_names();
        let first = self
            .rows
            .iter()
            .map(|r| r.setting.len())
            .chain([self.parameter.len()])
            .max()
            .unwrap_or(0);
        let mut out = format!("{:<first$}", self.parameter);
        for n in &names {
            let _ = write!(out, "  {n:>15}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<first$}", row.setting);
            for n in &names {
                let _ = write!(out, "  {:>15.3}", row.auroc[*n]);
            }
            out.push('\n');
        }
        out
    }
}

fn check_two_classes(corpus: &[PreparedQuestion]) -> Result<()> {
    let positives = corpus.iter().filter(|q| q.label.is_hallucination()).count();
    if positives == 0 || positives == corpus.len() {
        return Err(Error::UndefinedAuroc(format!(
            "corpus of {} questions has a single label class",
            corpus.len()
        )));
    }
    Ok(())
}

fn run(
    corpus: &[PreparedQuestion],
    cfg: &ScoringConfig,
    measures: &[Measure],
) -> Result<BTreeMap<String, f64>> {
    Ok(evaluate(&score_corpus(corpus, cfg, measures)?)?.auroc)
}

/// AUROC per cosine-similarity cut-off; each cut-off `s` clusters with
/// distance threshold `1 - s`.
pub fn ablate_threshold(
    corpus: &[PreparedQuestion],
    similarities: &[f64],
    algorithm: Algorithm,
    measures: &[Measure],
) -> Result<AblationTable> {
    check_two_classes(corpus)?;
    let rows = similarities
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "similarity threshold {s} outside (0, 1)"
                )));
            }
            let cfg = ScoringConfig {
                threshold: distance(s),
                algorithm,
            };
            Ok(AblationRow {
                setting: format!("{s:.2}"),
                auroc: run(corpus, &cfg, measures)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AblationTable {
        parameter: "similarity_threshold".into(),
        rows,
    })
}

/// AUROC when every question keeps only its first `p` answers.
///
/// Labels stay those of the full response set.
pub fn ablate_generations(
    corpus: &[PreparedQuestion],
    p_values: &[usize],
    cfg: &ScoringConfig,
    measures: &[Measure],
) -> Result<AblationTable> {
    check_two_classes(corpus)?;
    let rows = p_values
        .iter()
        .map(|&p| {
            let truncated = corpus
                .iter()
                .map(|q| q.truncated(p))
                .collect::<Result<Vec<_>>>()?;
            Ok(AblationRow {
                setting: p.to_string(),
                auroc: run(&truncated, cfg, measures)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AblationTable {
        parameter: "generations".into(),
        rows,
    })
}

/// AUROC of each clustering procedure at a fixed distance threshold.
pub fn ablate_algorithm(
    corpus: &[PreparedQuestion],
    threshold: f64,
    measures: &[Measure],
) -> Result<AblationTable> {
    check_two_classes(corpus)?;
    let rows = [Algorithm::HacAverage, Algorithm::Greedy]
        .into_iter()
        .map(|algorithm| {
            let cfg = ScoringConfig {
                threshold,
                algorithm,
            };
            Ok(AblationRow {
                setting: algorithm.name().into(),
                auroc: run(corpus, &cfg, measures)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AblationTable {
        parameter: "algorithm".into(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Label;
    use crate::types::{ResponseSet, SimilarityMatrix};

    /// Accurate questions: one group at similarity `tight`. Hallucinated: three
    /// orthogonal groups.
    fn corpus(tight: f64) -> Vec<PreparedQuestion> {
        let p = 6;
        let mut out = Vec::new();
        for q in 0..6 {
            let hallucinated = q % 2 == 0;
            let group = |i: usize| if hallucinated { i % 3 } else { 0 };
            let dense: Vec<Vec<f64>> = (0..p)
                .map(|i| {
                    (0..p)
                        .map(|j| if group(i) == group(j) { tight } else { 0.0 })
                        .collect()
                })
                .collect();
            let rs = ResponseSet::new(
                format!("q{q}"),
                "Q?",
                (0..p).map(|i| format!("answer {}", group(i))).collect(),
                None,
            )
            .unwrap();
            let label = if hallucinated {
                Label::Hallucination
            } else {
                Label::Accurate
            };
            out.push(
                PreparedQuestion::new(rs, SimilarityMatrix::from_dense(&dense).unwrap(), label)
                    .unwrap(),
            );
        }
        out
    }

    #[test]
    fn threshold_sweep_shape() {
        let table = ablate_threshold(
            &corpus(0.97),
            &DEFAULT_SIMILARITY_SWEEP,
            Algorithm::HacAverage,
            &Measure::ALL,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 6);
        assert!(table.row("0.95").is_some());
        assert_eq!(table.auroc("0.95", Measure::Sindex), Some(1.0));
        // at 0.99 every answer is a singleton, so all questions tie
        assert_eq!(table.auroc("0.99", Measure::Sindex), Some(0.5));
        let csv = table.to_csv();
        assert!(csv.starts_with("similarity_threshold,cluster_entropy,naive_entropy,sindex\n"));
        assert_eq!(csv.lines().count(), 7);
        assert_eq!(table.to_text().lines().count(), 7);
    }

    #[test]
    fn single_class_corpus_errors() {
        let mut c = corpus(0.97);
        for q in &mut c {
            q.label = Label::Accurate;
        }
        assert!(matches!(
            ablate_threshold(
                &c,
                &DEFAULT_SIMILARITY_SWEEP,
                Algorithm::HacAverage,
                &Measure::ALL
            ),
            Err(Error::UndefinedAuroc(_))
        ));
        assert!(ablate_generations(&c, &[2], &ScoringConfig::default(), &Measure::ALL).is_err());
    }

    #[test]
    fn generation_sweep() {
        let c = corpus(0.97);
        let table =
            ablate_generations(&c, &[2, 6], &ScoringConfig::default(), &Measure::ALL).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.auroc("6", Measure::Sindex), Some(1.0));
        let err =
            ablate_generations(&c, &[7], &ScoringConfig::default(), &Measure::ALL).unwrap_err();
        assert!(matches!(err, Error::InsufficientGenerations { ref id, .. } if id == "q0"));
    }

    #[test]
    fn algorithm_sweep() {
        let table = ablate_algorithm(&corpus(0.97), 0.05, &[Measure::Sindex]).unwrap();
        assert_eq!(table.auroc("hac_average", Measure::Sindex), Some(1.0));
        assert_eq!(table.auroc("greedy", Measure::Sindex), Some(1.0));
    }

    #[test]
    fn invalid_similarity_rejected() {
        assert!(
            ablate_threshold(&corpus(0.97), &[1.0], Algorithm::HacAverage, &Measure::ALL).is_err()
        );
    }
}
