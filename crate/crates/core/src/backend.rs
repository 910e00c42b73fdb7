use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::model::{LogisticModel, ModelArtifact, ProbabilisticClassifier, TrainConfig, TrainingLog, ARTIFACT_FORMAT};
use crate::remote::RemoteClassifier;

pub const REMOTE_ARTIFACT_FORMAT: &str = "selftrain-kit/remote";

/// Which classifier implementation to use.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendSpec {
    #[default]
    Native,
    Remote { url: String },
}

/// A native or remote classifier behind one type.
#[derive(Debug, Clone)]
pub enum Classifier {
    Native(LogisticModel),
    Remote(RemoteClassifier),
}

impl Classifier {
    /// A fresh, untrained classifier for `spec`. Remote backends are
    /// contacted immediately.
    pub fn create(spec: &BackendSpec) -> Result<Self> {
        Ok(match spec {
            BackendSpec::Native => Classifier::Native(LogisticModel::default()),
            BackendSpec::Remote { url } => Classifier::Remote(RemoteClassifier::connect(url.clone())?),
        })
    }

    /// Native models are saved in full; remote ones as a pointer to the service.
    pub fn save(&self, path: impl AsRef<Path>, self_training_rounds: u32) -> Result<()> {
        match self {
            Classifier::Native(m) => {
                let mut m = m.clone();
                m.self_training_rounds = self_training_rounds;
                m.save(path)
            }
            Classifier::Remote(r) => crate::io::write_json(
                path.as_ref(),
                &RemoteArtifact {
                    format: REMOTE_ARTIFACT_FORMAT.into(),
                    url: r.base_url().to_string(),
                    model: r.model_name().map(str::to_string),
                    self_training_rounds,
                },
            ),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, u32)> {
        let path = path.as_ref();
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&body).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))?;
        let bad = |e: serde_json::Error| Error::Artifact(format!("{}: {e}", path.display()));
        match value.get("format").and_then(|f| f.as_str()) {
            Some(ARTIFACT_FORMAT) => {
                let a: ModelArtifact = serde_json::from_value(value).map_err(bad)?;
                let m = LogisticModel::from_artifact(a)?;
                let rounds = m.self_training_rounds;
                Ok((Classifier::Native(m), rounds))
            }
            Some(REMOTE_ARTIFACT_FORMAT) => {
                let a: RemoteArtifact = serde_json::from_value(value).map_err(bad)?;
                Ok((Classifier::Remote(RemoteClassifier::connect(a.url)?), a.self_training_rounds))
            }
            other => Err(Error::Artifact(format!(
                "{}: unknown artifact format {other:?}",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RemoteArtifact {
    format: String,
    url: String,
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    self_training_rounds: u32,
}

impl ProbabilisticClassifier for Classifier {
    fn fit(&mut self, train: &Dataset, valid: &Dataset, cfg: &TrainConfig) -> Result<TrainingLog> {
        match self {
            Classifier::Native(m) => m.fit(train, valid, cfg),
            Classifier::Remote(r) => r.fit(train, valid, cfg),
        }
    }

    fn is_trained(&self) -> bool {
        match self {
            Classifier::Native(m) => m.is_trained(),
            Classifier::Remote(r) => r.is_trained(),
        }
    }

    fn predict_proba(&self, text: &str) -> Result<f64> {
        match self {
            Classifier::Native(m) => m.predict_proba(text),
            Classifier::Remote(r) => r.predict_proba(text),
        }
    }

    fn predict_proba_batch(&self, texts: &[&str]) -> Result<Vec<f64>> {
        match self {
            Classifier::Native(m) => m.predict_proba_batch(texts),
            Classifier::Remote(r) => r.predict_proba_batch(texts),
        }
    }
}
