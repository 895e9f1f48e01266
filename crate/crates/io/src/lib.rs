//! Everything around the scoring core that touches the outside world:
//! datasets, the embedding cache and service client, configuration and the
//! synthetic corpus generator.

pub mod cache;
pub mod config;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod pipeline;
pub mod records;
pub mod service;
pub mod synth;

pub use cache::{cache_key, EmbeddingCache};
pub use config::{Config, LabelEmbedding, ENDPOINT_ENV};
pub use dataset::{load_dataset, parse_dataset, write_dataset, DatasetRecord};
pub use embed::{fetch_embeddings, Embedder};
pub use error::{Error, Result};
pub use records::ScoreRecord;
pub use service::{EmbeddingService, HttpEmbeddingService};
pub use synth::{synth_corpus, SynthConfig};
