//! Run configuration: defaults, optional TOML file, environment, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sindex_core::{
    Algorithm, LabelPolicy, Measure, DEFAULT_DISTANCE_THRESHOLD, DEFAULT_LABEL_THRESHOLD,
    DEFAULT_SEPARATOR,
};

use crate::embed::DEFAULT_BATCH_SIZE;
use crate::error::{Error, Result};

/// Overrides `endpoint` when set.
pub const ENDPOINT_ENV: &str = "SINDEX_ENDPOINT";

/// What text is embedded when comparing responses to the canonical answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelEmbedding {
    /// The bare answer text.
    AnswerOnly,
    /// Question, separator and answer, as used for clustering.
    Representative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub separator: String,
    /// Clustering distance threshold (1 - cosine similarity).
    pub distance_threshold: f64,
    pub label_threshold: f64,
    /// Generations per question used for scoring.
    pub generations: usize,
    pub algorithm: Algorithm,
    pub endpoint: Option<String>,
    pub model: String,
    pub measures: Vec<Measure>,
    pub label_policy: LabelPolicy,
    pub label_embedding: LabelEmbedding,
    pub cache: PathBuf,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            separator: DEFAULT_SEPARATOR.to_string(),
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
            label_threshold: DEFAULT_LABEL_THRESHOLD,
            generations: 10,
            algorithm: Algorithm::HacAverage,
            endpoint: None,
            model: "all-MiniLM-L6-v2".into(),
            measures: Measure::ALL.to_vec(),
            label_policy: LabelPolicy::Majority,
            label_embedding: LabelEmbedding::AnswerOnly,
            cache: PathBuf::from("embeddings.cache"),
            batch_size: DEFAULT_BATCH_SIZE,
            seed: 0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// File (if any) over defaults, then the environment endpoint override.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply_env(std::env::var(ENDPOINT_ENV).ok());
        Ok(cfg)
    }

    pub fn apply_env(&mut self, endpoint: Option<String>) {
        if let Some(url) = endpoint.filter(|u| !u.trim().is_empty()) {
            self.endpoint = Some(url);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.distance_threshold) {
            return Err(Error::Config(format!(
                "distance_threshold {} outside [0, 2]",
                self.distance_threshold
            )));
        }
        if !(-1.0..=1.0).contains(&self.label_threshold) {
            return Err(Error::Config(format!(
                "label_threshold {} outside [-1, 1]",
                self.label_threshold
            )));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if self.measures.is_empty() {
            return Err(Error::Config("measure list is empty".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.model.is_empty() {
            return Err(Error::Config("model id is empty".into()));
        }
        Ok(())
    }
}
