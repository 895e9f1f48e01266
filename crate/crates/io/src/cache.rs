//! Binary embedding cache.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   8 bytes  "SIDXEMB\0"
//! version u32      1
//! dim     u32      0 while the cache is empty
//! entries          32-byte key followed by `dim` f32 values, sorted by key
//! ```
//!
//! Keys are SHA-256 digests of the model id and the exact input string, so the
//! same text embedded by two models never shares an entry. Entries are written
//! in key order, which makes the file a pure function of its contents.

use std::collections::BTreeMap;
use std::fs;
use std::io::{ErrorKind, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CACHE_MAGIC: [u8; 8] = *b"SIDXEMB\0";
pub const CACHE_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub type CacheKey = [u8; 32];

pub fn cache_key(model_id: &str, input: &str) -> CacheKey {
    let mut h = Sha256::new();
    h.update((model_id.len() as u64).to_le_bytes());
    h.update(model_id.as_bytes());
    h.update(input.as_bytes());
    h.finalize().into()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingCache {
    dim: Option<usize>,
    entries: BTreeMap<CacheKey, Vec<f32>>,
}

impl EmbeddingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &CacheKey) -> Option<&[f32]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &CacheKey) -> bool {
        self.entries.contains_key(key)
    }

    /// Insert a vector. The first insert fixes the cache dimension; later
    /// vectors of another dimension are rejected.
    pub fn insert(&mut self, key: CacheKey, vector: Vec<f32>) -> Result<()> {
        if vector.is_empty() {
            return Err(Error::Cache("refusing to store an empty vector".into()));
        }
        match self.dim {
            Some(d) if d != vector.len() => {
                return Err(Error::DimensionDrift {
                    expected: d,
                    actual: vector.len(),
                })
            }
            _ => self.dim = Some(vector.len()),
        }
        self.entries.insert(key, vector);
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.dim.unwrap_or(0);
        let mut out = Vec::with_capacity(HEADER_LEN + self.entries.len() * (32 + 4 * dim));
        out.extend_from_slice(&CACHE_MAGIC);
        out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        out.extend_from_slice(&(dim as u32).to_le_bytes());
        for (key, vector) in &self.entries {
            out.extend_from_slice(key);
            for x in vector {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Cache(format!(
                "truncated header ({} bytes)",
                bytes.len()
            )));
        }
        if bytes[..8] != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let version = word(8);
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let dim = word(12) as usize;
        let body = &bytes[HEADER_LEN..];
        if dim == 0 {
            if !body.is_empty() {
                return Err(Error::Cache("entries present with zero dimension".into()));
            }
            return Ok(Self::new());
        }
        let entry_len = 32 + 4 * dim;
        if !body.len().is_multiple_of(entry_len) {
            return Err(Error::Cache(format!(
                "body of {} bytes is not a whole number of {entry_len}-byte entries",
                body.len()
            )));
        }
        let mut entries = BTreeMap::new();
        for chunk in body.chunks_exact(entry_len) {
            let key: CacheKey = chunk[..32].try_into().unwrap();
            let vector = chunk[32..]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            entries.insert(key, vector);
        }
        Ok(EmbeddingCache {
            dim: Some(dim),
            entries,
        })
    }

    /// Load from `path`; a missing file yields an empty cache.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match fs::read(path) {
            Ok(bytes) => Self::from_bytes(&bytes),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Write to a temporary file beside `path`, then rename over it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(&self.to_bytes())
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }
}
