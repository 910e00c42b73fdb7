//! The probabilistic-classifier contract and the native backend.

mod features;
mod logistic;
mod schedule;

pub use features::{featurize, FeatureVector, Featurizer, DEFAULT_DIM, DEFAULT_NGRAM_RANGE};
pub use logistic::{logistic_loss, logistic_loss_grad, sigmoid, LogisticModel, ModelArtifact, ARTIFACT_FORMAT};
pub use schedule::WarmupCosine;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};

/// A binary classifier that reports the probability of the `Yes` class.
///
/// Implementations must return values in `[0, 1]` for any input string and
/// be deterministic for a fixed trained state.
pub trait ProbabilisticClassifier: Send + Sync {
    /// Trains from scratch, replacing any previous state.
    fn fit(&mut self, train: &Dataset, valid: &Dataset, cfg: &TrainConfig) -> Result<TrainingLog>;

    fn is_trained(&self) -> bool;

    fn predict_proba(&self, text: &str) -> Result<f64>;

    fn predict_proba_batch(&self, texts: &[&str]) -> Result<Vec<f64>> {
        texts.iter().map(|t| self.predict_proba(t)).collect()
    }
}

impl<C: ProbabilisticClassifier + ?Sized> ProbabilisticClassifier for Box<C> {
    fn fit(&mut self, train: &Dataset, valid: &Dataset, cfg: &TrainConfig) -> Result<TrainingLog> {
        (**self).fit(train, valid, cfg)
    }

    fn is_trained(&self) -> bool {
        (**self).is_trained()
    }

    fn predict_proba(&self, text: &str) -> Result<f64> {
        (**self).predict_proba(text)
    }

    fn predict_proba_batch(&self, texts: &[&str]) -> Result<Vec<f64>> {
        (**self).predict_proba_batch(texts)
    }
}

/// `Yes` iff `p >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DecisionRule {
    threshold: f64,
}

impl DecisionRule {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;

    pub fn new(threshold: f64) -> Result<Self> {
        if threshold > 0.0 && threshold < 1.0 {
            Ok(DecisionRule { threshold })
        } else {
            Err(Error::Domain(format!("decision threshold {threshold} not in (0, 1)")))
        }
    }

    pub fn threshold(self) -> f64 {
        self.threshold
    }
}

impl Default for DecisionRule {
    fn default() -> Self {
        DecisionRule {
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }
}

impl TryFrom<f64> for DecisionRule {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        DecisionRule::new(t)
    }
}

impl From<DecisionRule> for f64 {
    fn from(r: DecisionRule) -> f64 {
        r.threshold
    }
}

pub fn decide(p: f64, rule: DecisionRule) -> Result<Label> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} not in [0, 1]")));
    }
    Ok(if p >= rule.threshold { Label::Yes } else { Label::No })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Linear warmup from 0, then cosine decay to 0.
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub peak_lr: f64,
    pub warmup_ratio: f64,
    pub schedule: Schedule,
    pub batch_size: usize,
    pub grad_accum: usize,
    pub eval_every_steps: usize,
    pub epochs: usize,
    pub seed: u64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Threshold used when scoring validation checkpoints.
    pub eval_threshold: DecisionRule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            peak_lr: 0.1,
            warmup_ratio: 0.03,
            schedule: Schedule::Cosine,
            batch_size: 1,
            grad_accum: 1,
            eval_every_steps: 100,
            epochs: 1,
            seed: 0,
            weight_decay: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            eval_threshold: DecisionRule::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.peak_lr.is_nan() || self.peak_lr <= 0.0 {
            return bad(format!("train.peak_lr must be positive, got {}", self.peak_lr));
        }
        if !(0.0..1.0).contains(&self.warmup_ratio) {
            return bad(format!("train.warmup_ratio {} not in [0, 1)", self.warmup_ratio));
        }
        if self.eval_every_steps == 0 {
            return bad("train.eval_every_steps must be >= 1".into());
        }
        if self.batch_size == 0 || self.grad_accum == 0 || self.epochs == 0 {
            return bad("train.batch_size, grad_accum and epochs must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.eps.is_nan() || self.eps <= 0.0 {
            return bad("train optimizer betas must be in [0, 1) and eps positive".into());
        }
        if self.weight_decay < 0.0 {
            return bad("train.weight_decay must be non-negative".into());
        }
        Ok(())
    }

    /// Optimizer updates for `n` training samples.
    pub fn total_steps(&self, n: usize) -> usize {
        (n * self.epochs).div_ceil(self.batch_size * self.grad_accum)
    }

    /// Stable 64-bit fingerprint of the configuration.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", crate::seed::text_seed(&json))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: usize,
    pub macro_f1: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub records: Vec<EvalRecord>,
    pub selected_step: usize,
    pub best_macro_f1: f64,
    pub total_steps: usize,
    pub warmup_steps: usize,
}

impl TrainingLog {
    /// Builds a log whose selected step is the best record.
    pub fn from_records(records: Vec<EvalRecord>, total_steps: usize, warmup_steps: usize) -> Self {
        let best = select_checkpoint(&records);
        TrainingLog {
            selected_step: best.map_or(0, |i| records[i].step),
            best_macro_f1: best.map_or(0.0, |i| records[i].macro_f1),
            records,
            total_steps,
            warmup_steps,
        }
    }
}

/// Index of the record with the highest macro F1, earliest on ties.
pub fn select_checkpoint(records: &[EvalRecord]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in records.iter().enumerate() {
        match best {
            Some(b) if r.macro_f1 <= records[b].macro_f1 => {}
            _ => best = Some(i),
        }
    }
    best
}
