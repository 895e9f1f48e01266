//! Automated hallucination labels from similarity to a canonical answer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::cosine_similarity;
use crate::types::{EmbeddingMatrix, ResponseSet};

pub const DEFAULT_LABEL_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Accurate,
    Hallucination,
}

impl Label {
    /// 1 for hallucination, the positive class.
    pub fn as_binary(self) -> u8 {
        match self {
            Label::Accurate => 0,
            Label::Hallucination => 1,
        }
    }

    pub fn is_hallucination(self) -> bool {
        self == Label::Hallucination
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledResponse {
    pub response_index: usize,
    pub similarity_to_truth: f64,
    pub label: Label,
}

/// How per-response labels collapse into one label per question.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelPolicy {
    /// Hallucination when at least half the responses are hallucinations.
    #[default]
    Majority,
    /// Use the label of one designated low-temperature generation.
    LowTempReference { index: usize },
}

/// Label each response: accurate iff its similarity to the truth embedding
/// is strictly greater than `label_threshold`.
pub fn label_responses(
    rs: &ResponseSet,
    response_embeddings: &EmbeddingMatrix,
    truth_embedding: &[f64],
    label_threshold: f64,
) -> Result<Vec<LabeledResponse>> {
    if rs.canonical_answer.is_none() {
        return Err(Error::MissingCanonicalAnswer(rs.id.clone()));
    }
    if response_embeddings.rows() != rs.len() {
        return Err(Error::SizeMismatch(format!(
            "{} answers but {} response embeddings",
            rs.len(),
            response_embeddings.rows()
        )));
    }
    if truth_embedding.len() != response_embeddings.dim() {
        return Err(Error::DimensionMismatch {
            expected: response_embeddings.dim(),
            actual: truth_embedding.len(),
        });
    }
    if truth_embedding.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector(0));
    }
    response_embeddings
        .iter_rows()
        .enumerate()
        .map(|(response_index, row)| {
            let similarity_to_truth = cosine_similarity(row, truth_embedding)?;
            let label = if similarity_to_truth > label_threshold {
                Label::Accurate
            } else {
                Label::Hallucination
            };
            Ok(LabeledResponse {
                response_index,
                similarity_to_truth,
                label,
            })
        })
        .collect()
}

pub fn question_label(labels: &[LabeledResponse], policy: LabelPolicy) -> Result<Label> {
    if labels.is_empty() {
        return Err(Error::MalformedInput("no labeled responses".into()));
    }
    match policy {
        LabelPolicy::Majority => {
            let hallucinated = labels.iter().filter(|l| l.label.is_hallucination()).count();
            Ok(if 2 * hallucinated >= labels.len() {
                Label::Hallucination
            } else {
                Label::Accurate
            })
        }
        LabelPolicy::LowTempReference { index } => labels
            .iter()
            .find(|l| l.response_index == index)
            .map(|l| l.label)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("no labeled response with index {index}"))
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(n: usize) -> ResponseSet {
        ResponseSet::new(
            "q1",
            "Which song?",
            (0..n).map(|i| format!("answer {i}")).collect(),
            Some("Moon River".into()),
        )
        .unwrap()
    }

    fn labels(pattern: &[Label]) -> Vec<LabeledResponse> {
        pattern
            .iter()
            .enumerate()
            .map(|(i, &label)| LabeledResponse {
                response_index: i,
                similarity_to_truth: 0.0,
                label,
            })
            .collect()
    }

    #[test]
    fn identical_and_orthogonal() {
        let em = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let out = label_responses(&rs(2), &em, &[1.0, 0.0], DEFAULT_LABEL_THRESHOLD).unwrap();
        assert_eq!(out[0].similarity_to_truth, 1.0);
        assert_eq!(out[0].label, Label::Accurate);
        assert_eq!(out[1].similarity_to_truth, 0.0);
        assert_eq!(out[1].label, Label::Hallucination);
    }

    #[test]
    fn similarity_exactly_at_threshold_is_hallucination() {
        let row = vec![0.95, (1.0f64 - 0.95 * 0.95).sqrt()];
        let em = EmbeddingMatrix::from_rows(&[row]).unwrap();
        let out = label_responses(&rs(1), &em, &[1.0, 0.0], DEFAULT_LABEL_THRESHOLD).unwrap();
        assert_eq!(out[0].similarity_to_truth, 0.95);
        assert_eq!(out[0].label, Label::Hallucination);
        let out = label_responses(&rs(1), &em, &[1.0, 0.0], 0.949).unwrap();
        assert_eq!(out[0].label, Label::Accurate);
    }

    #[test]
    fn errors() {
        let em = EmbeddingMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let mut missing = rs(1);
        missing.canonical_answer = None;
        assert!(matches!(
            label_responses(&missing, &em, &[1.0, 0.0], 0.95),
            Err(Error::MissingCanonicalAnswer(_))
        ));
        assert!(matches!(
            label_responses(&rs(1), &em, &[1.0, 0.0, 0.0], 0.95),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(label_responses(&rs(1), &em, &[0.0, 0.0], 0.95).is_err());
        assert!(label_responses(&rs(2), &em, &[1.0, 0.0], 0.95).is_err());
    }

    #[test]
    fn majority_policy() {
        use Label::*;
        let mut seven_three = vec![Accurate; 7];
        seven_three.extend([Hallucination; 3]);
        assert_eq!(
            question_label(&labels(&seven_three), LabelPolicy::Majority).unwrap(),
            Accurate
        );

        let mut tie = vec![Accurate; 5];
        tie.extend([Hallucination; 5]);
        assert_eq!(
            question_label(&labels(&tie), LabelPolicy::Majority).unwrap(),
            Hallucination
        );

        assert!(question_label(&[], LabelPolicy::Majority).is_err());
    }

    #[test]
    fn low_temp_reference_policy() {
        let one = labels(&[Label::Accurate]);
        let policy = LabelPolicy::LowTempReference { index: 0 };
        assert_eq!(question_label(&one, policy).unwrap(), Label::Accurate);
        let many = labels(&[Label::Accurate, Label::Hallucination, Label::Hallucination]);
        assert_eq!(question_label(&many, policy).unwrap(), Label::Accurate);
        assert!(question_label(&many, LabelPolicy::LowTempReference { index: 7 }).is_err());
    }
}
