//! File-backed pipeline configuration (TOML).
//!
//! ```toml
//! [corpus]
//! train = "data/train.jsonl"
//! pool = ["data/dev.jsonl", "data/test.jsonl"]
//! holdout_per_class = 100
//!
//! [augment]
//! fraction = 0.10
//! techniques = ["anonymize", "lowercase", "uppercase", "homoglyph"]
//!
//! [train]
//! peak_lr = 0.1
//! warmup_ratio = 0.03
//!
//! [selftrain]
//! pos_threshold = 0.99
//! neg_threshold = 0.01
//!
//! [decision]
//! threshold = 0.7
//!
//! [backend]
//! kind = "native"   # or kind = "remote", url = "http://127.0.0.1:8000"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::AugmentConfig;
use crate::backend::BackendSpec;
use crate::corpus::{MAX_CHARS, MIN_CHARS};
use crate::error::{Error, Result};
use crate::model::{DecisionRule, TrainConfig};
use crate::selftrain::SelfTrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub train: Option<PathBuf>,
    pub holdout: Option<PathBuf>,
    pub pool: Vec<PathBuf>,
    pub min_chars: usize,
    pub max_chars: usize,
    pub holdout_per_class: usize,
    pub split_seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            train: None,
            holdout: None,
            pool: Vec::new(),
            min_chars: MIN_CHARS,
            max_chars: MAX_CHARS,
            holdout_per_class: 100,
            split_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionConfig {
    pub threshold: DecisionRule,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusConfig,
    pub augment: AugmentConfig,
    pub train: TrainConfig,
    pub selftrain: SelfTrainConfig,
    pub decision: DecisionConfig,
    pub backend: BackendSpec,
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&body).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.augment.validate()?;
        self.train.validate()?;
        self.selftrain.validate()?;
        if let BackendSpec::Remote { url } = &self.backend {
            if !(url.starts_with("http://") || url.starts_with("https://")) {
                return Err(Error::Config(format!("backend.url {url:?} is not an http(s) URL")));
            }
        }
        if self.corpus.min_chars > self.corpus.max_chars {
            return Err(Error::Config("corpus.min_chars exceeds corpus.max_chars".into()));
        }
        Ok(())
    }
}
