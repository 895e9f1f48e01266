//! Cache-first embedding lookup.

use std::collections::HashMap;

use sindex_core::EmbeddingMatrix;

use crate::cache::{cache_key, CacheKey, EmbeddingCache};
use crate::error::{Error, Result};
use crate::service::EmbeddingService;

pub const DEFAULT_BATCH_SIZE: usize = 64;

/// Embeddings for `strings`, row `i` for `strings[i]`, rows normalized.
///
/// Strings already in `cache` are served locally. The remaining distinct
/// strings go to `service` in batches of `batch_size`, and the results are
/// added to `cache`.
pub fn fetch_embeddings(
    strings: &[String],
    service: Option<&dyn EmbeddingService>,
    model_id: &str,
    cache: &mut EmbeddingCache,
    batch_size: usize,
) -> Result<EmbeddingMatrix> {
    let keys: Vec<CacheKey> = strings.iter().map(|s| cache_key(model_id, s)).collect();

    let mut seen = HashMap::new();
    let mut missing: Vec<(CacheKey, &String)> = Vec::new();
    for (key, s) in keys.iter().zip(strings) {
        if !cache.contains(key) && seen.insert(*key, ()).is_none() {
            missing.push((*key, s));
        }
    }

    if !missing.is_empty() {
        let Some(service) = service else {
            return Err(Error::MissingEmbeddings {
                missing: missing.iter().map(|(_, s)| (*s).clone()).collect(),
            });
        };
        for batch in missing.chunks(batch_size.max(1)) {
            let inputs: Vec<String> = batch.iter().map(|(_, s)| (*s).clone()).collect();
            let vectors = match service.embed(model_id, &inputs) {
                Ok(v) => v,
                Err(Error::Service(msg)) => {
                    return Err(Error::Service(format!(
                        "{msg}; {} input(s) not embedded",
                        missing.len()
                    )))
                }
                Err(e) => return Err(e),
            };
            if vectors.len() != inputs.len() {
                return Err(Error::Service(format!(
                    "sent {} inputs, received {} vectors",
                    inputs.len(),
                    vectors.len()
                )));
            }
            for ((key, _), vector) in batch.iter().zip(vectors) {
                cache.insert(*key, vector)?;
            }
        }
    }

    let rows: Vec<Vec<f64>> = keys
        .iter()
        .map(|k| {
            cache
                .get(k)
                .expect("every key is cached at this point")
                .iter()
                .map(|&x| f64::from(x))
                .collect()
        })
        .collect();
    Ok(EmbeddingMatrix::from_rows_normalized(&rows)?)
}

/// Bundles a cache, an optional service and the model id.
pub struct Embedder<'a> {
    pub cache: EmbeddingCache,
    service: Option<&'a dyn EmbeddingService>,
    model_id: String,
    batch_size: usize,
    dirty: bool,
}

impl<'a> Embedder<'a> {
    pub fn new(
        cache: EmbeddingCache,
        service: Option<&'a dyn EmbeddingService>,
        model_id: impl Into<String>,
    ) -> Self {
        Embedder {
            cache,
            service,
            model_id: model_id.into(),
            batch_size: DEFAULT_BATCH_SIZE,
            dirty: false,
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn embed(&mut self, strings: &[String]) -> Result<EmbeddingMatrix> {
        let before = self.cache.len();
        let out = fetch_embeddings(
            strings,
            self.service,
            &self.model_id,
            &mut self.cache,
            self.batch_size,
        );
        self.dirty |= self.cache.len() != before;
        out
    }

    /// Whether new entries were added since construction.
    pub fn is_dirty(&self) -> bool {
        self.dirty
    }
}
