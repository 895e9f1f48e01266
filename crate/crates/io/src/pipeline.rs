//! From dataset records to similarity matrices, labels, scores and
//! evaluation records.
//!
//! Records with inline embeddings are used as-is; otherwise representative
//! strings (and, for labeling, answer or canonical texts) are embedded through
//! an [`Embedder`].

use sindex_core::{
    build_representative_strings, cluster, label_responses, measures, pairwise_similarity,
    question_label, Clustering, EmbeddingMatrix, EvalRecord, Label, LabeledResponse,
    PreparedQuestion, ResponseSet, ScoreReport, SimilarityMatrix,
};

use crate::config::{Config, LabelEmbedding};
use crate::dataset::DatasetRecord;
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::records::ScoreRecord;

/// The record's answers capped at `cfg.generations`.
pub fn response_set(record: &DatasetRecord, cfg: &Config) -> Result<ResponseSet> {
    let rs = record.response_set()?;
    let p = cfg.generations.min(rs.len());
    Ok(rs.truncated(p)?)
}

fn embed_texts(embedder: Option<&mut Embedder<'_>>, texts: &[String]) -> Result<EmbeddingMatrix> {
    match embedder {
        Some(e) => e.embed(texts),
        None => Err(Error::MissingEmbeddings {
            missing: texts.to_vec(),
        }),
    }
}

fn representative_texts(rs: &ResponseSet, cfg: &Config) -> Result<Vec<String>> {
    Ok(build_representative_strings(rs, &cfg.separator)?
        .into_iter()
        .map(|s| s.value)
        .collect())
}

/// Embeddings used for clustering.
pub fn clustering_embeddings(
    record: &DatasetRecord,
    rs: &ResponseSet,
    cfg: &Config,
    embedder: Option<&mut Embedder<'_>>,
) -> Result<EmbeddingMatrix> {
    match record.inline_embeddings()? {
        Some(em) => Ok(em.truncated(rs.len())?),
        None => embed_texts(embedder, &representative_texts(rs, cfg)?),
    }
}

pub fn similarity(
    record: &DatasetRecord,
    cfg: &Config,
    embedder: Option<&mut Embedder<'_>>,
) -> Result<(ResponseSet, SimilarityMatrix)> {
    let rs = response_set(record, cfg)?;
    let em = clustering_embeddings(record, &rs, cfg, embedder)?;
    Ok((rs, pairwise_similarity(&em)))
}

/// Per-response labels and the collapsed question label.
pub fn label(
    record: &DatasetRecord,
    cfg: &Config,
    mut embedder: Option<&mut Embedder<'_>>,
) -> Result<(Vec<LabeledResponse>, Label)> {
    let rs = response_set(record, cfg)?;
    let canonical = rs
        .canonical_answer
        .clone()
        .ok_or_else(|| sindex_core::Error::MissingCanonicalAnswer(rs.id.clone()))?;

    let responses = match (record.inline_embeddings()?, cfg.label_embedding) {
        (Some(em), _) => em.truncated(rs.len())?,
        (None, LabelEmbedding::AnswerOnly) => embed_texts(embedder.as_deref_mut(), &rs.answers)?,
        (None, LabelEmbedding::Representative) => {
            embed_texts(embedder.as_deref_mut(), &representative_texts(&rs, cfg)?)?
        }
    };
    let truth: Vec<f64> = match &record.canonical_embedding {
        Some(v) => v.clone(),
        None => {
            let text = match cfg.label_embedding {
                LabelEmbedding::AnswerOnly => canonical,
                LabelEmbedding::Representative => {
                    format!("{}{}{}", rs.question, cfg.separator, canonical)
                }
            };
            embed_texts(embedder, &[text])?.row(0).to_vec()
        }
    };
    let labels = label_responses(&rs, &responses, &truth, cfg.label_threshold)?;
    let collapsed = question_label(&labels, cfg.label_policy)?;
    Ok((labels, collapsed))
}

pub fn score(
    record: &DatasetRecord,
    cfg: &Config,
    embedder: Option<&mut Embedder<'_>>,
) -> Result<(Clustering, ScoreReport)> {
    let (rs, sm) = similarity(record, cfg, embedder)?;
    let c = cluster(&sm, cfg.distance_threshold, cfg.algorithm)?;
    let report = measures::score(&rs, &c, &sm)?;
    Ok((c, report))
}

pub fn score_records(
    records: &[DatasetRecord],
    cfg: &Config,
    mut embedder: Option<&mut Embedder<'_>>,
) -> Result<Vec<ScoreRecord>> {
    records
        .iter()
        .map(|r| {
            let (_, report) = score(r, cfg, embedder.as_deref_mut())?;
            Ok(ScoreRecord::new(r.id.clone(), &report, &cfg.measures))
        })
        .collect()
}

/// Similarity matrices and labels for every record, ready for scoring or
/// ablation.
pub fn prepare_corpus(
    records: &[DatasetRecord],
    cfg: &Config,
    mut embedder: Option<&mut Embedder<'_>>,
) -> Result<Vec<PreparedQuestion>> {
    records
        .iter()
        .map(|r| {
            let (rs, sm) = similarity(r, cfg, embedder.as_deref_mut())?;
            let (_, label) = label(r, cfg, embedder.as_deref_mut())?;
            Ok(PreparedQuestion::new(rs, sm, label)?)
        })
        .collect()
}

pub fn eval_records(
    records: &[DatasetRecord],
    cfg: &Config,
    embedder: Option<&mut Embedder<'_>>,
) -> Result<Vec<EvalRecord>> {
    let corpus = prepare_corpus(records, cfg, embedder)?;
    let scoring = sindex_core::ScoringConfig {
        threshold: cfg.distance_threshold,
        algorithm: cfg.algorithm,
    };
    Ok(sindex_core::evaluation::score_corpus(
        &corpus,
        &scoring,
        &cfg.measures,
    )?)
}

/// Counts from [`embed_dataset`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmbedSummary {
    pub inputs: usize,
    pub new_entries: usize,
}

/// Make sure every embedding the other commands need is in the cache:
/// representative strings, bare answers and canonical answers.
pub fn embed_dataset(
    records: &[DatasetRecord],
    cfg: &Config,
    embedder: &mut Embedder<'_>,
) -> Result<EmbedSummary> {
    let before = embedder.cache.len();
    let mut inputs = 0;
    for r in records {
        let rs = response_set(r, cfg)?;
        let mut texts = representative_texts(&rs, cfg)?;
        texts.extend(rs.answers.iter().cloned());
        if let Some(c) = &rs.canonical_answer {
            texts.push(c.clone());
            texts.push(format!("{}{}{}", rs.question, cfg.separator, c));
        }
        inputs += texts.len();
        embedder.embed(&texts)?;
    }
    Ok(EmbedSummary {
        inputs,
        new_entries: embedder.cache.len() - before,
    })
}
