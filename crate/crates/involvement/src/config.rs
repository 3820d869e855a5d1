//! Training and model configuration with serde defaults, validation, and a
//! stable content hash embedded into artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config field `{field}`: {message}")]
    InvalidField { field: &'static str, message: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: u32,
    pub batch_train: usize,
    pub batch_val: usize,
    pub step_size: u32,
    pub gamma: f64,
    pub beta: f64,
    pub heads: usize,
    pub alpha: f64,
    pub seed: u64,
    pub d_model: usize,
    pub d_proj: usize,
    pub hidden_main: usize,
    pub hidden_eval: usize,
    pub threshold: f64,
    /// Collapse each fusion weight vector to a single learnable scalar.
    pub scalar_fusion_weights: bool,
    /// L2-normalize query/key rows in cross-attention.
    pub normalize_qk: bool,
    /// Ablation switches for the three feature blocks.
    pub use_low: bool,
    pub use_high: bool,
    pub use_deep: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            weight_decay: 1e-4,
            epochs: 30,
            batch_train: 512,
            batch_val: 64,
            step_size: 5,
            gamma: 0.5,
            beta: 0.5,
            heads: 8,
            alpha: 0.3,
            seed: 0,
            d_model: 256,
            d_proj: 128,
            hidden_main: 128,
            hidden_eval: 64,
            threshold: 0.5,
            scalar_fusion_weights: false,
            normalize_qk: false,
            use_low: true,
            use_high: true,
            use_deep: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::InvalidField {
                    field,
                    message: format!("must be positive and finite, got {v}"),
                })
            }
        }
        positive("lr", self.lr)?;
        positive("weight_decay", self.weight_decay)?;
        positive("gamma", self.gamma)?;
        positive("alpha", self.alpha)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ConfigError::InvalidField {
                field: "beta",
                message: format!("must be non-negative, got {}", self.beta),
            });
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError::InvalidField {
                field: "threshold",
                message: format!("must lie in (0,1), got {}", self.threshold),
            });
        }
        for (field, v) in [
            ("epochs", self.epochs as usize),
            ("batch_train", self.batch_train),
            ("batch_val", self.batch_val),
            ("step_size", self.step_size as usize),
            ("heads", self.heads),
            ("d_model", self.d_model),
            ("d_proj", self.d_proj),
            ("hidden_main", self.hidden_main),
            ("hidden_eval", self.hidden_eval),
        ] {
            if v == 0 {
                return Err(ConfigError::InvalidField {
                    field,
                    message: "must be positive".into(),
                });
            }
        }
        if self.d_model % self.heads != 0 {
            return Err(ConfigError::InvalidField {
                field: "heads",
                message: format!("{} does not divide d_model {}", self.heads, self.d_model),
            });
        }
        if !(self.use_low || self.use_high || self.use_deep) {
            return Err(ConfigError::InvalidField {
                field: "use_low",
                message: "at least one feature block must stay enabled".into(),
            });
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let config: Self =
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Stable hash of the canonical JSON form, recorded in every artifact.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_training_recipe() {
        let c = TrainConfig::default();
        assert_eq!(c.lr, 1e-3);
        assert_eq!(c.weight_decay, 1e-4);
        assert_eq!(c.epochs, 30);
        assert_eq!(c.batch_train, 512);
        assert_eq!(c.batch_val, 64);
        assert_eq!(c.step_size, 5);
        assert_eq!(c.gamma, 0.5);
        assert_eq!(c.beta, 0.5);
        assert_eq!(c.heads, 8);
        assert_eq!(c.alpha, 0.3);
        c.validate().unwrap();
    }

    #[test]
    fn partial_json_takes_defaults() {
        let c: TrainConfig = serde_json::from_str(r#"{"epochs": 3, "seed": 9}"#).unwrap();
        assert_eq!(c.epochs, 3);
        assert_eq!(c.seed, 9);
        assert_eq!(c.lr, 1e-3);
        assert_eq!(c.beta, 0.5);
    }

    #[test]
    fn unknown_field_rejected() {
        let result: Result<TrainConfig, _> = serde_json::from_str(r#"{"learning_rate": 0.1}"#);
        assert!(result.is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let bad = TrainConfig {
            lr: -1.0,
            ..Default::default()
        };
        match bad.validate() {
            Err(ConfigError::InvalidField { field, .. }) => assert_eq!(field, "lr"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = TrainConfig {
            heads: 7,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(ConfigError::InvalidField { field: "heads", .. })
        ));
        let bad = TrainConfig {
            use_low: false,
            use_high: false,
            use_deep: false,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = TrainConfig::default();
        let mut b = TrainConfig::default();
        assert_eq!(a.content_hash(), b.content_hash());
        b.seed = 1;
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
