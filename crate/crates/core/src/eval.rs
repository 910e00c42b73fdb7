//! Confusion matrices, macro-averaged F1, threshold sweeps and prediction files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Label};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{decide, DecisionRule, ProbabilisticClassifier};

/// Binary confusion counts with `Yes` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same matrix with `No` treated as the positive class.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn record(&mut self, gold: Label, pred: Label) {
        match (gold, pred) {
            (Label::Yes, Label::Yes) => self.tp += 1,
            (Label::No, Label::Yes) => self.fp += 1,
            (Label::Yes, Label::No) => self.fn_ += 1,
            (Label::No, Label::No) => self.tn += 1,
        }
    }

    /// Precision, recall and F1 of the positive class; zero on empty denominators.
    pub fn positive_class(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self.tp, self.fp, self.fn_)
    }

    pub fn negative_class(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self.tn, self.fn_, self.fp)
    }
}

pub fn confusion(golds: &[Label], preds: &[Label]) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::LengthMismatch {
            left: golds.len(),
            right: preds.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in golds.iter().zip(preds) {
        cm.record(g, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
        }
    }
}

/// Unweighted mean of the two per-class F1 scores.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    (cm.positive_class().f1 + cm.negative_class().f1) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix,
    pub yes: ClassMetrics,
    pub no: ClassMetrics,
    pub macro_f1: f64,
    pub threshold: f64,
    /// Gold labels contain only one class; macro F1 is then capped at 0.5.
    pub single_class_gold: bool,
}

impl EvalReport {
    pub fn from_matrix(matrix: ConfusionMatrix, rule: DecisionRule) -> Self {
        let single_class_gold = matrix.total() > 0 && (matrix.tp + matrix.fn_ == 0 || matrix.tn + matrix.fp == 0);
        EvalReport {
            matrix,
            yes: matrix.positive_class(),
            no: matrix.negative_class(),
            macro_f1: macro_f1(&matrix),
            threshold: rule.threshold(),
            single_class_gold,
        }
    }
}

/// Scores positive-class probabilities against gold labels under `rule`.
pub fn evaluate_probs(golds: &[Label], probs: &[f64], rule: DecisionRule) -> Result<EvalReport> {
    let preds = probs
        .iter()
        .map(|&p| decide(p, rule))
        .collect::<Result<Vec<_>>>()?;
    let cm = confusion(golds, &preds)?;
    Ok(EvalReport::from_matrix(cm, rule))
}

pub fn evaluate(model: &dyn ProbabilisticClassifier, data: &Dataset, rule: DecisionRule) -> Result<EvalReport> {
    let golds = gold_labels(data)?;
    let texts: Vec<&str> = data.iter().map(|s| s.text.as_str()).collect();
    let probs = model.predict_proba_batch(&texts)?;
    evaluate_probs(&golds, &probs, rule)
}

pub(crate) fn gold_labels(data: &Dataset) -> Result<Vec<Label>> {
    data.iter().map(|s| s.require_label()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub best_threshold: f64,
    pub points: Vec<EvalReport>,
}

impl SweepResult {
    pub fn best(&self) -> &EvalReport {
        self.points
            .iter()
            .find(|r| r.threshold == self.best_threshold)
            .expect("best threshold is a grid point")
    }
}

/// Evaluates every threshold of `grid`; the best is the one with the highest
/// macro F1, the smallest threshold winning ties.
pub fn sweep_probs(golds: &[Label], probs: &[f64], grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Domain("threshold grid is empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        points.push(evaluate_probs(golds, probs, DecisionRule::new(t)?)?);
    }
    let best = points
        .iter()
        .reduce(|best, r| {
            if r.macro_f1 > best.macro_f1 || (r.macro_f1 == best.macro_f1 && r.threshold < best.threshold) {
                r
            } else {
                best
            }
        })
        .expect("non-empty");
    Ok(SweepResult {
        best_threshold: best.threshold,
        points,
    })
}

pub fn threshold_sweep(model: &dyn ProbabilisticClassifier, valid: &Dataset, grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Domain("threshold grid is empty".into()));
    }
    let golds = gold_labels(valid)?;
    let texts: Vec<&str> = valid.iter().map(|s| s.text.as_str()).collect();
    let probs = model.predict_proba_batch(&texts)?;
    sweep_probs(&golds, &probs, grid)
}

/// `0.05, 0.10, ..., 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Serialize, Deserialize)]
struct PredictionRecord {
    id: String,
    label: Label,
}

pub fn write_predictions(ids: &[String], labels: &[Label], path: impl AsRef<Path>) -> Result<()> {
    if ids.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: labels.len(),
        });
    }
    write_atomic(path.as_ref(), |w| {
        for (id, &label) in ids.iter().zip(labels) {
            let rec = PredictionRecord { id: id.clone(), label };
            serde_json::to_writer(&mut *w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<(String, Label)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord =
            serde_json::from_str(&line).map_err(|source| Error::Parse { line: idx + 1, source })?;
        out.push((rec.id, rec.label));
    }
    Ok(out)
}

/// Aligns predictions with the gold set by id. Every gold id must be predicted.
pub fn align_predictions(golds: &Dataset, predictions: &[(String, Label)]) -> Result<(Vec<Label>, Vec<Label>)> {
    let by_id: HashMap<&str, Label> = predictions.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    let missing: Vec<String> = golds
        .iter()
        .filter(|s| !by_id.contains_key(s.id.as_str()))
        .map(|s| s.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingIds(missing));
    }
    let gold = gold_labels(golds)?;
    let pred = golds.iter().map(|s| by_id[s.id.as_str()]).collect();
    Ok((gold, pred))
}

/// Report label in the `base_ST_th0.7` convention.
pub fn variant_name(base: &str, self_trained: bool, rule: DecisionRule) -> String {
    let mut name = base.to_string();
    if self_trained {
        name.push_str("_ST");
    }
    if rule.threshold() != DecisionRule::DEFAULT_THRESHOLD {
        let _ = write!(name, "_th{}", rule.threshold());
    }
    name
}

/// Two-column `Detector | Macro F1` table with 2-decimal scores.
pub fn render_table(rows: &[(String, f64)]) -> String {
    let width = rows
        .iter()
        .map(|(n, _)| n.chars().count())
        .chain(std::iter::once("Detector".len()))
        .max()
        .unwrap_or(8);
    let mut out = String::new();
    let _ = writeln!(out, "{:>width$} | Macro F1", "Detector");
    let _ = writeln!(out, "{}-+---------", "-".repeat(width));
    for (name, f1) in rows {
        let _ = writeln!(out, "{name:>width$} | {f1:.2}");
    }
    out
}
