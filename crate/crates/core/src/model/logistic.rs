//! Logistic regression over hashed character n-grams, trained with a lazy
//! (sparse) AdamW variant under a warmup-cosine schedule.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    decide, EvalRecord, FeatureVector, Featurizer, ProbabilisticClassifier, TrainConfig, TrainingLog,
    WarmupCosine,
};
use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};
use crate::eval::{macro_f1, ConfusionMatrix};
use crate::seed::derive_seed;

pub const ARTIFACT_FORMAT: &str = "selftrain-kit/logistic";
const ARTIFACT_VERSION: u32 = 1;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of logit `z` against target `y`, computed as
/// `softplus(z) - y * z`.
pub fn logistic_loss(z: f64, y: f64) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    softplus - y * z
}

/// Loss and gradient of one sample. The weight gradient is sparse over the
/// features of `x`.
pub fn logistic_loss_grad(weights: &[f64], bias: f64, x: &FeatureVector, y: f64) -> (f64, Vec<(u32, f64)>, f64) {
    let z = x.dot(weights) + bias;
    let residual = sigmoid(z) - y;
    let grad = x.entries().iter().map(|&(i, v)| (i, residual * v)).collect();
    (logistic_loss(z, y), grad, residual)
}

#[derive(Debug, Clone)]
pub struct LogisticModel {
    featurizer: Featurizer,
    weights: Vec<f64>,
    bias: f64,
    trained: bool,
    train_config: Option<TrainConfig>,
    /// Self-training rounds that produced this model; 0 for plain training.
    pub self_training_rounds: u32,
}

impl Default for LogisticModel {
    fn default() -> Self {
        Self::new(Featurizer::default())
    }
}

impl LogisticModel {
    /// An untrained model.
    pub fn new(featurizer: Featurizer) -> Self {
        LogisticModel {
            featurizer,
            weights: Vec::new(),
            bias: 0.0,
            trained: false,
            train_config: None,
            self_training_rounds: 0,
        }
    }

    /// A usable model with all parameters zero (predicts 0.5 everywhere).
    pub fn zeros(featurizer: Featurizer) -> Self {
        Self::from_parameters(featurizer, vec![0.0; featurizer.dim], 0.0).expect("dimension matches")
    }

    pub fn from_parameters(featurizer: Featurizer, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.len() != featurizer.dim {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: featurizer.dim,
            });
        }
        Ok(LogisticModel {
            featurizer,
            weights,
            bias,
            trained: true,
            train_config: None,
            self_training_rounds: 0,
        })
    }

    pub fn featurizer(&self) -> &Featurizer {
        &self.featurizer
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn set_weight(&mut self, index: usize, value: f64) {
        self.weights[index] = value;
    }

    pub fn set_bias(&mut self, bias: f64) {
        self.bias = bias;
    }

    pub fn train_config(&self) -> Option<&TrainConfig> {
        self.train_config.as_ref()
    }

    pub fn logit(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    fn check_trained(&self) -> Result<()> {
        if self.trained {
            Ok(())
        } else {
            Err(Error::Untrained)
        }
    }

    pub fn to_artifact(&self) -> Result<ModelArtifact> {
        self.check_trained()?;
        Ok(ModelArtifact {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            featurizer: self.featurizer,
            bias: self.bias,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| (i as u32, w))
                .collect(),
            config_hash: self.train_config.as_ref().map(TrainConfig::fingerprint),
            train_config: self.train_config.clone(),
            self_training_rounds: self.self_training_rounds,
        })
    }

    pub fn from_artifact(a: ModelArtifact) -> Result<Self> {
        if a.format != ARTIFACT_FORMAT {
            return Err(Error::Artifact(format!("unknown format {:?}", a.format)));
        }
        if a.version != ARTIFACT_VERSION {
            return Err(Error::Artifact(format!("unsupported version {}", a.version)));
        }
        let mut weights = vec![0.0; a.featurizer.dim];
        for (i, w) in a.weights {
            let slot = weights
                .get_mut(i as usize)
                .ok_or_else(|| Error::Artifact(format!("weight index {i} out of range")))?;
            *slot = w;
        }
        let mut m = Self::from_parameters(a.featurizer, weights, a.bias)?;
        m.train_config = a.train_config;
        m.self_training_rounds = a.self_training_rounds;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path.as_ref(), &self.to_artifact()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let artifact: ModelArtifact =
            serde_json::from_str(&body).map_err(|e| Error::Artifact(format!("{}: {e}", path.display())))?;
        Self::from_artifact(artifact)
    }
}

/// Persisted model state. Weights are stored sparsely as `(index, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub featurizer: Featurizer,
    pub bias: f64,
    pub weights: Vec<(u32, f64)>,
    pub config_hash: Option<String>,
    pub train_config: Option<TrainConfig>,
    #[serde(default)]
    pub self_training_rounds: u32,
}

/// Lazy AdamW: moment estimates and decoupled weight decay are updated only
/// for coordinates with a non-zero gradient in the current step; bias
/// correction uses the global step count.
struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    m_bias: f64,
    v_bias: f64,
    t: i32,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
}

impl AdamW {
    fn new(dim: usize, cfg: &TrainConfig) -> Self {
        AdamW {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            m_bias: 0.0,
            v_bias: 0.0,
            t: 0,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.eps,
            weight_decay: cfg.weight_decay,
        }
    }

    fn step(&mut self, weights: &mut [f64], bias: &mut f64, grad: &[(u32, f64)], grad_bias: f64, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for &(i, g) in grad {
            let i = i as usize;
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let update = (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
            weights[i] -= lr * (update + self.weight_decay * weights[i]);
        }
        self.m_bias = self.beta1 * self.m_bias + (1.0 - self.beta1) * grad_bias;
        self.v_bias = self.beta2 * self.v_bias + (1.0 - self.beta2) * grad_bias * grad_bias;
        *bias -= lr * (self.m_bias / c1) / ((self.v_bias / c2).sqrt() + self.eps);
    }
}

/// Sums sparse gradients that arrive sample by sample within one step.
#[derive(Default)]
struct GradAccumulator {
    entries: Vec<(u32, f64)>,
    bias: f64,
    count: usize,
}

impl GradAccumulator {
    fn add(&mut self, grad: Vec<(u32, f64)>, grad_bias: f64) {
        self.entries.extend(grad);
        self.bias += grad_bias;
        self.count += 1;
    }

    /// Mean gradient, merged by index, then reset.
    fn take_mean(&mut self) -> (Vec<(u32, f64)>, f64) {
        let scale = 1.0 / self.count as f64;
        let mut entries = std::mem::take(&mut self.entries);
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, g) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == i => *acc += g,
                _ => merged.push((i, g)),
            }
        }
        for (_, g) in &mut merged {
            *g *= scale;
        }
        let bias = self.bias * scale;
        self.bias = 0.0;
        self.count = 0;
        (merged, bias)
    }
}

fn labeled_features(featurizer: &Featurizer, d: &Dataset) -> Result<Vec<(FeatureVector, Label)>> {
    let labels: Vec<Label> = d.iter().map(|s| s.require_label()).collect::<Result<_>>()?;
    let features: Vec<FeatureVector> = d.samples().par_iter().map(|s| featurizer.featurize(&s.text)).collect();
    Ok(features.into_iter().zip(labels).collect())
}

fn validation_macro_f1(weights: &[f64], bias: f64, valid: &[(FeatureVector, Label)], cfg: &TrainConfig) -> f64 {
    let mut cm = ConfusionMatrix::default();
    for (x, gold) in valid {
        let p = sigmoid(x.dot(weights) + bias);
        cm.record(*gold, decide(p, cfg.eval_threshold).expect("sigmoid is in [0, 1]"));
    }
    macro_f1(&cm)
}

impl ProbabilisticClassifier for LogisticModel {
    fn fit(&mut self, train: &Dataset, valid: &Dataset, cfg: &TrainConfig) -> Result<TrainingLog> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyTrainSet);
        }
        if valid.is_empty() {
            return Err(Error::EmptyValidSet);
        }
        let train_x = labeled_features(&self.featurizer, train)?;
        let valid_x = labeled_features(&self.featurizer, valid)?;

        let dim = self.featurizer.dim;
        let mut weights = vec![0.0; dim];
        let mut bias = 0.0;
        let mut opt = AdamW::new(dim, cfg);
        let total = cfg.total_steps(train_x.len());
        let schedule = WarmupCosine::new(cfg.peak_lr, cfg.warmup_ratio, total);
        let per_step = cfg.batch_size * cfg.grad_accum;

        let mut records = Vec::new();
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        let mut acc = GradAccumulator::default();
        let mut step = 0usize;

        let mut order: Vec<usize> = (0..train_x.len()).collect();
        let mut seen = 0usize;
        let n_samples = train_x.len() * cfg.epochs;
        for epoch in 0..cfg.epochs {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64));
            order.shuffle(&mut rng);
            for &idx in &order {
                let (x, label) = &train_x[idx];
                let (_, grad, grad_bias) = logistic_loss_grad(&weights, bias, x, label.target());
                acc.add(grad, grad_bias);
                seen += 1;
                if acc.count < per_step && seen < n_samples {
                    continue;
                }
                let (grad, grad_bias) = acc.take_mean();
                let lr = schedule.lr(step);
                opt.step(&mut weights, &mut bias, &grad, grad_bias, lr);
                step += 1;

                if step.is_multiple_of(cfg.eval_every_steps) || step == total {
                    let f1 = validation_macro_f1(&weights, bias, &valid_x, cfg);
                    log::debug!("step {step}/{total}: lr {lr:.3e}, valid macro F1 {f1:.4}");
                    records.push(EvalRecord { step, macro_f1: f1, lr });
                    if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
                        best = Some((f1, weights.clone(), bias));
                    }
                }
            }
        }
        debug_assert_eq!(step, total);

        let (_, best_weights, best_bias) = best.expect("final step is always evaluated");
        self.weights = best_weights;
        self.bias = best_bias;
        self.trained = true;
        self.train_config = Some(cfg.clone());
        let log = TrainingLog::from_records(records, total, schedule.warmup_steps);
        log::info!(
            "trained on {} samples, {} steps; selected step {} (valid macro F1 {:.4})",
            train.len(),
            total,
            log.selected_step,
            log.best_macro_f1
        );
        Ok(log)
    }

    fn is_trained(&self) -> bool {
        self.trained
    }

    fn predict_proba(&self, text: &str) -> Result<f64> {
        self.check_trained()?;
        Ok(sigmoid(self.logit(&self.featurizer.featurize(text))))
    }

    fn predict_proba_batch(&self, texts: &[&str]) -> Result<Vec<f64>> {
        self.check_trained()?;
        Ok(texts
            .par_iter()
            .map(|t| sigmoid(self.logit(&self.featurizer.featurize(t))))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sample, Split};

    fn small() -> Featurizer {
        Featurizer {
            dim: 1 << 12,
            ..Featurizer::default()
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!((logistic_loss(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert!(logistic_loss(-800.0, 1.0).is_finite());
    }

    #[test]
    fn zero_state_predicts_half() {
        let m = LogisticModel::zeros(small());
        assert_eq!(m.predict_proba("anything at all").unwrap(), 0.5);
        assert_eq!(m.predict_proba("").unwrap(), 0.5);
    }

    #[test]
    fn empty_text_is_sigmoid_bias() {
        let mut m = LogisticModel::zeros(small());
        m.set_bias(1.25);
        m.set_weight(3, 4.0);
        assert_eq!(m.predict_proba("").unwrap(), sigmoid(1.25));
    }

    #[test]
    fn weight_increase_raises_probability() {
        let mut m = LogisticModel::zeros(small());
        let text = "hello";
        let feature = m.featurizer().featurize(text).entries()[0].0 as usize;
        let before = m.predict_proba(text).unwrap();
        m.set_weight(feature, 0.5);
        assert!(m.predict_proba(text).unwrap() > before);
    }

    #[test]
    fn untrained_errors() {
        let m = LogisticModel::new(small());
        assert!(matches!(m.predict_proba("x"), Err(Error::Untrained)));
        assert!(m.to_artifact().is_err());
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let mut m = LogisticModel::new(small());
        let valid = Dataset::new(Split::Holdout, vec![Sample::labeled("v", "x", Label::Yes)]).unwrap();
        let empty = Dataset::empty(Split::Train);
        assert!(matches!(
            m.fit(&empty, &valid, &TrainConfig::default()),
            Err(Error::EmptyTrainSet)
        ));
        let unlabeled = Dataset::new(Split::Train, vec![Sample::unlabeled("u", "x")]).unwrap();
        assert!(matches!(
            m.fit(&unlabeled, &valid, &TrainConfig::default()),
            Err(Error::Unlabeled(_))
        ));
        let train = Dataset::new(Split::Train, vec![Sample::labeled("t", "x", Label::No)]).unwrap();
        assert!(matches!(
            m.fit(&train, &Dataset::empty(Split::Holdout), &TrainConfig::default()),
            Err(Error::EmptyValidSet)
        ));
    }

    #[test]
    fn accumulator_means_by_index() {
        let mut acc = GradAccumulator::default();
        acc.add(vec![(1, 1.0), (4, 2.0)], 1.0);
        acc.add(vec![(4, 4.0)], 3.0);
        let (g, b) = acc.take_mean();
        assert_eq!(g, vec![(1, 0.5), (4, 3.0)]);
        assert_eq!(b, 2.0);
        assert_eq!(acc.count, 0);
    }

    #[test]
    fn artifact_round_trip_is_exact() {
        let mut m = LogisticModel::zeros(small());
        m.set_weight(7, 0.1 + 0.2);
        m.set_weight(100, -1e-17);
        m.set_bias(-0.333);
        m.self_training_rounds = 1;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let back = LogisticModel::load(&path).unwrap();
        assert_eq!(back.weights(), m.weights());
        assert_eq!(back.bias(), m.bias());
        assert_eq!(back.self_training_rounds, 1);
    }

    #[test]
    fn artifact_rejects_bad_index() {
        let mut a = LogisticModel::zeros(small()).to_artifact().unwrap();
        a.weights.push((1 << 20, 1.0));
        assert!(LogisticModel::from_artifact(a).is_err());
    }
}
