//! HTTP client for a remote classifier service.
//!
//! Wire protocol (JSON over HTTP, UTF-8):
//!
//! - `GET /health` → `{"status":"ok","model":"...","trained":true}`
//!   (`trained` optional, assumed true when absent)
//! - `POST /train` with `{"train":[record..],"valid":[record..],"config":{..}}`
//!   where a record is `{"id","text","label"}` →
//!   `{"job":"...","status":"completed","best_macro_f1":0.9,"log":{..}}`
//!   (`log` optional). A busy service answers `409` with `{"status":"busy"}`.
//! - `POST /predict_proba` with `{"texts":[..]}` → `{"probs":[..]}`, same
//!   order and length, every value in `[0, 1]`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::model::{ProbabilisticClassifier, TrainConfig, TrainingLog};

/// Texts per `/predict_proba` request.
pub const DEFAULT_MAX_BATCH: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub trained: Option<bool>,
}

#[derive(Serialize)]
struct WireRecord<'a> {
    id: &'a str,
    text: &'a str,
    label: &'static str,
}

#[derive(Serialize)]
struct TrainRequest<'a> {
    train: Vec<WireRecord<'a>>,
    valid: Vec<WireRecord<'a>>,
    config: &'a TrainConfig,
}

#[derive(Deserialize)]
struct TrainResponse {
    #[serde(default)]
    job: Option<String>,
    status: String,
    #[serde(default)]
    best_macro_f1: Option<f64>,
    #[serde(default)]
    log: Option<TrainingLog>,
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct PredictResponse {
    probs: Vec<f64>,
}

/// Client for a remote service. The service holds a single model, so clones
/// share it: after one clone calls `fit`, all of them predict with the new
/// weights.
#[derive(Debug, Clone)]
pub struct RemoteClassifier {
    base_url: String,
    agent: Agent,
    trained: bool,
    model: Option<String>,
    pub max_batch: usize,
}

impl RemoteClassifier {
    /// Connects and checks `/health`.
    pub fn connect(base_url: impl Into<String>) -> Result<Self> {
        let base_url = base_url.into().trim_end_matches('/').to_string();
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_connect(Some(Duration::from_secs(10)))
            .build()
            .into();
        let mut client = RemoteClassifier {
            base_url,
            agent,
            trained: false,
            model: None,
            max_batch: DEFAULT_MAX_BATCH,
        };
        let health = client.health()?;
        if health.status != "ok" {
            return Err(Error::Remote(format!(
                "{} reports status {:?}",
                client.base_url, health.status
            )));
        }
        client.trained = health.trained.unwrap_or(true);
        client.model = health.model;
        Ok(client)
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn model_name(&self) -> Option<&str> {
        self.model.as_deref()
    }

    pub fn health(&self) -> Result<Health> {
        let url = format!("{}/health", self.base_url);
        let resp = self.agent.get(&url).call().map_err(|e| connection_error(&url, e))?;
        read_json(&url, resp)
    }

    fn post<B: Serialize, T: for<'de> Deserialize<'de>>(&self, path: &str, body: &B) -> Result<T> {
        let url = format!("{}{}", self.base_url, path);
        let resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| connection_error(&url, e))?;
        read_json(&url, resp)
    }
}

fn connection_error(url: &str, e: ureq::Error) -> Error {
    Error::Remote(format!("cannot reach {url}: {e}"))
}

fn read_json<T: for<'de> Deserialize<'de>>(url: &str, mut resp: ureq::http::Response<ureq::Body>) -> Result<T> {
    let status = resp.status().as_u16();
    let body = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Remote(format!("{url}: reading response: {e}")))?;
    if status == 409 {
        return Err(Error::Remote(format!("{url}: service busy (409): {body}")));
    }
    if !(200..300).contains(&status) {
        return Err(Error::Remote(format!("{url}: HTTP {status}: {body}")));
    }
    serde_json::from_str(&body).map_err(|e| Error::Remote(format!("{url}: malformed response: {e}")))
}

fn wire_records(d: &Dataset) -> Result<Vec<WireRecord<'_>>> {
    d.iter()
        .map(|s| {
            Ok(WireRecord {
                id: &s.id,
                text: &s.text,
                label: s.require_label()?.as_str(),
            })
        })
        .collect()
}

impl ProbabilisticClassifier for RemoteClassifier {
    fn fit(&mut self, train: &Dataset, valid: &Dataset, cfg: &TrainConfig) -> Result<TrainingLog> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyTrainSet);
        }
        if valid.is_empty() {
            return Err(Error::EmptyValidSet);
        }
        let request = TrainRequest {
            train: wire_records(train)?,
            valid: wire_records(valid)?,
            config: cfg,
        };
        let resp: TrainResponse = self.post("/train", &request)?;
        if resp.status != "completed" {
            return Err(Error::Remote(format!(
                "training job {} ended with status {:?}",
                resp.job.as_deref().unwrap_or("?"),
                resp.status
            )));
        }
        self.trained = true;
        Ok(resp.log.unwrap_or_else(|| TrainingLog {
            best_macro_f1: resp.best_macro_f1.unwrap_or(f64::NAN),
            total_steps: cfg.total_steps(train.len()),
            ..TrainingLog::default()
        }))
    }

    fn is_trained(&self) -> bool {
        self.trained
    }

    fn predict_proba(&self, text: &str) -> Result<f64> {
        Ok(self.predict_proba_batch(&[text])?[0])
    }

    fn predict_proba_batch(&self, texts: &[&str]) -> Result<Vec<f64>> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.max_batch.max(1)) {
            let resp: PredictResponse = self.post("/predict_proba", &PredictRequest { texts: chunk })?;
            if resp.probs.len() != chunk.len() {
                return Err(Error::Remote(format!(
                    "/predict_proba returned {} probabilities for {} texts",
                    resp.probs.len(),
                    chunk.len()
                )));
            }
            if let Some(p) = resp.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Remote(format!("/predict_proba returned {p}, outside [0, 1]")));
            }
            out.extend(resp.probs);
        }
        Ok(out)
    }
}
