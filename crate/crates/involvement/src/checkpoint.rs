//! Versioned checkpoint container: parameter values plus a metadata block
//! (feature layout hash, training configuration, prompt template hashes,
//! normalization statistics).
//!
//! The container is canonical JSON with sorted keys, so save → load → save
//! is byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::ParamStore;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checkpoint: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported checkpoint version {0} (expected {CHECKPOINT_VERSION})")]
    Version(u32),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: ParamStore,
    /// Free-form metadata; BTreeMap keeps serialization order stable.
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Checkpoint {
    pub fn new(params: ParamStore) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            params,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: &str, value: serde_json::Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub fn metadata_as<T: serde::de::DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.metadata
            .get(key)
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&bytes)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(ckpt.version));
        }
        Ok(ckpt)
    }
}
