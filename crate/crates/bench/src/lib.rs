//! Fixtures shared by the criterion benches.

use sindex_core::evaluation::{random_unit_vectors, PreparedQuestion};
use sindex_core::{pairwise_similarity, EmbeddingMatrix, SimilarityMatrix};
use sindex_io::{pipeline, synth_corpus, Config, SynthConfig};

pub const DIM: usize = 384;

pub fn embeddings(p: usize) -> EmbeddingMatrix {
    random_unit_vectors(p, DIM, p as u64).expect("valid fixture size")
}

pub fn similarity(p: usize) -> SimilarityMatrix {
    pairwise_similarity(&embeddings(p))
}

/// Prepared synthetic corpus with inline embeddings.
pub fn corpus(questions: usize) -> Vec<PreparedQuestion> {
    let records = synth_corpus(&SynthConfig {
        questions,
        ..SynthConfig::default()
    })
    .expect("valid synth config");
    pipeline::prepare_corpus(&records, &Config::default(), None).expect("synthetic corpus prepares")
}
