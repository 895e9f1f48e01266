//! Hallucination detection for sets of sampled LLM answers.
//!
//! Answers are embedded, clustered by cosine distance with average linkage,
//! and scored with SINdex, an entropy over cluster proportions weighted by
//! each cluster's internal similarity. High scores mean the samples disagree
//! with each other, which is a signal of hallucination.
//!
//! ```
//! use sindex_core::{hac_average_linkage, pairwise_similarity, sindex, EmbeddingMatrix};
//!
//! let em = EmbeddingMatrix::from_rows(&[
//!     vec![1.0, 0.0],
//!     vec![1.0, 0.01],
//!     vec![0.0, 1.0],
//! ])
//! .unwrap();
//! let sm = pairwise_similarity(&em);
//! let clusters = hac_average_linkage(&sm, 0.05).unwrap();
//! assert_eq!(clusters.k, 2);
//! let report = sindex(&clusters, &sm).unwrap();
//! assert!(report.sindex > 0.0);
//! ```

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod labeling;
pub mod math;
pub mod measures;
pub mod types;

pub use clustering::{
    cluster, cluster_proportions, distance, greedy_cluster, hac_average_linkage, Algorithm,
    Clustering, Merge, DEFAULT_DISTANCE_THRESHOLD,
};
pub use error::{Error, Result};
pub use evaluation::{auroc, evaluate, AurocTable, EvalRecord, PreparedQuestion, ScoringConfig};
pub use labeling::{
    label_responses, question_label, Label, LabelPolicy, LabeledResponse, DEFAULT_LABEL_THRESHOLD,
};
pub use math::{cosine_similarity, pairwise_similarity, shannon_entropy};
pub use measures::{
    adjusted_proportions, avg_intra_similarity, naive_entropy, sindex, ClusterCoherence, Measure,
    ScoreReport,
};
pub use types::{
    build_representative_strings, EmbeddingMatrix, RepresentativeString, ResponseSet,
    SimilarityMatrix, DEFAULT_SEPARATOR,
};
