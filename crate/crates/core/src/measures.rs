//! Inconsistency scores computed from a clustering.
//!
//! SINdex is the entropy of the cluster proportions after each proportion has
//! been scaled by its cluster's mean intra-cluster cosine similarity:
//!
//! ```text
//! p'_i   = p_i * coherence_i
//! SINdex = -Σ p'_i ln p'_i
//! ```
//!
//! Coherence is clamped to `[0, 1]` and singletons have coherence 1, so
//! `0 <= p'_i <= p_i` always holds and SINdex equals the plain cluster entropy
//! when every cluster is perfectly coherent.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{cluster_proportions, Clustering};
use crate::error::{Error, Result};
use crate::math::shannon_entropy;
use crate::types::{ResponseSet, SimilarityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCoherence {
    /// Mean pairwise cosine similarity per cluster, clamped to [0, 1].
    pub avg_similarity: Vec<f64>,
    /// Number of unordered member pairs per cluster.
    pub pair_counts: Vec<usize>,
}

impl ClusterCoherence {
    /// Perfect coherence for `k` clusters.
    pub fn unit(sizes: &[usize]) -> Self {
        ClusterCoherence {
            avg_similarity: vec![1.0; sizes.len()],
            pair_counts: sizes.iter().map(|&n| n * n.saturating_sub(1) / 2).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub sindex: f64,
    /// Entropy of the unadjusted cluster proportions.
    pub cluster_entropy: f64,
    /// Exact-match entropy; only filled in by [`score`], which sees the text.
    pub naive_entropy: f64,
    pub k: usize,
    pub proportions: Vec<f64>,
    pub adjusted_proportions: Vec<f64>,
}

/// Named scalar measures a [`ScoreReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Sindex,
    ClusterEntropy,
    NaiveEntropy,
}

impl Measure {
    pub const ALL: [Measure; 3] = [
        Measure::Sindex,
        Measure::ClusterEntropy,
        Measure::NaiveEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Sindex => "sindex",
            Measure::ClusterEntropy => "cluster_entropy",
            Measure::NaiveEntropy => "naive_entropy",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown measure {s:?}")))
    }
}

impl ScoreReport {
    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Sindex => self.sindex,
            Measure::ClusterEntropy => self.cluster_entropy,
            Measure::NaiveEntropy => self.naive_entropy,
        }
    }
}

/// Mean pairwise similarity inside each cluster.
pub fn avg_intra_similarity(c: &Clustering, sm: &SimilarityMatrix) -> Result<ClusterCoherence> {
    if c.len() != sm.size() {
        return Err(Error::SizeMismatch(format!(
            "clustering covers {} responses, similarity matrix {}",
            c.len(),
            sm.size()
        )));
    }
    let members = c.members();
    let mut avg_similarity = Vec::with_capacity(c.k);
    let mut pair_counts = Vec::with_capacity(c.k);
    for cluster in &members {
        let n = cluster.len();
        let pairs = n * n.saturating_sub(1) / 2;
        pair_counts.push(pairs);
        if pairs == 0 {
            avg_similarity.push(1.0);
            continue;
        }
        let mut total = 0.0;
        for (x, &i) in cluster.iter().enumerate() {
            for &j in &cluster[x + 1..] {
                total += sm.get(i, j);
            }
        }
        avg_similarity.push((total / pairs as f64).clamp(0.0, 1.0));
    }
    Ok(ClusterCoherence {
        avg_similarity,
        pair_counts,
    })
}

/// `p'_i = p_i * coherence_i`.
pub fn adjusted_proportions(p: &[f64], coh: &ClusterCoherence) -> Result<Vec<f64>> {
    if p.len() != coh.avg_similarity.len() {
        return Err(Error::SizeMismatch(format!(
            "{} proportions but {} coherence values",
            p.len(),
            coh.avg_similarity.len()
        )));
    }
    Ok(p.iter()
        .zip(&coh.avg_similarity)
        .map(|(&pi, &s)| pi * s.clamp(0.0, 1.0))
        .collect())
}

/// SINdex and cluster entropy for a clustering. `naive_entropy` is left at 0.
pub fn sindex(c: &Clustering, sm: &SimilarityMatrix) -> Result<ScoreReport> {
    let coh = avg_intra_similarity(c, sm)?;
    sindex_with_coherence(c, &coh)
}

/// SINdex from an externally supplied coherence vector.
pub fn sindex_with_coherence(c: &Clustering, coh: &ClusterCoherence) -> Result<ScoreReport> {
    let proportions = cluster_proportions(c);
    let adjusted = adjusted_proportions(&proportions, coh)?;
    Ok(ScoreReport {
        sindex: shannon_entropy(&adjusted)?,
        cluster_entropy: shannon_entropy(&proportions)?,
        naive_entropy: 0.0,
        k: c.k,
        proportions,
        adjusted_proportions: adjusted,
    })
}

/// Case-fold and collapse runs of whitespace.
pub fn normalize_answer(answer: &str) -> String {
    answer
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Entropy of exact-match answer groups after [`normalize_answer`].
pub fn naive_entropy(rs: &ResponseSet) -> f64 {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for a in &rs.answers {
        *counts.entry(normalize_answer(a)).or_default() += 1;
    }
    let total = rs.answers.len() as f64;
    let mut sizes: Vec<usize> = counts.into_values().collect();
    // fixed summation order
    sizes.sort_unstable();
    let p: Vec<f64> = sizes.into_iter().map(|n| n as f64 / total).collect();
    shannon_entropy(&p).unwrap_or(0.0)
}

/// Full report for one response set: SINdex, cluster entropy and naive entropy.
pub fn score(rs: &ResponseSet, c: &Clustering, sm: &SimilarityMatrix) -> Result<ScoreReport> {
    if rs.len() != c.len() {
        return Err(Error::SizeMismatch(format!(
            "{} answers but clustering covers {}",
            rs.len(),
            c.len()
        )));
    }
    let mut report = sindex(c, sm)?;
    report.naive_entropy = naive_entropy(rs);
    Ok(report)
}
