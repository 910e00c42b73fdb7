//! Self-training: a teacher trained on gold labels pseudo-labels an
//! unlabeled pool, the confident predictions are merged into the training
//! set, and a fresh model is trained on the result.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{dedup, Dataset, DedupStats, Label, Provenance, Sample};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{ProbabilisticClassifier, TrainConfig, TrainingLog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfTrainConfig {
    /// Keep as `Yes` when `p >= pos_threshold`.
    pub pos_threshold: f64,
    /// Keep as `No` when `p <= neg_threshold`.
    pub neg_threshold: f64,
    pub rounds: u32,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            pos_threshold: 0.99,
            neg_threshold: 0.01,
            rounds: 1,
        }
    }
}

impl SelfTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.neg_threshold && self.neg_threshold < self.pos_threshold && self.pos_threshold < 1.0;
        if !ok {
            return Err(Error::Config(format!(
                "selftrain thresholds must satisfy 0 < neg ({}) < pos ({}) < 1",
                self.neg_threshold, self.pos_threshold
            )));
        }
        if self.rounds == 0 {
            return Err(Error::Config("selftrain.rounds must be >= 1".into()));
        }
        Ok(())
    }
}

/// A pool sample kept with a model-assigned label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilverRecord {
    pub id: String,
    pub p: f64,
    pub assigned: Label,
    pub round: u32,
}

/// Positive-class probability for every pool sample, in pool order.
pub fn pseudo_label(model: &dyn ProbabilisticClassifier, pool: &Dataset) -> Result<Vec<(String, f64)>> {
    if !model.is_trained() {
        return Err(Error::Untrained);
    }
    let texts: Vec<&str> = pool.iter().map(|s| s.text.as_str()).collect();
    let probs = model.predict_proba_batch(&texts)?;
    if probs.len() != pool.len() {
        return Err(Error::LengthMismatch {
            left: pool.len(),
            right: probs.len(),
        });
    }
    Ok(pool.iter().map(|s| s.id.clone()).zip(probs).collect())
}

/// Keeps predictions at or beyond the confidence thresholds.
pub fn filter_confident(preds: &[(String, f64)], cfg: &SelfTrainConfig, round: u32) -> Result<Vec<SilverRecord>> {
    let mut out = Vec::new();
    for (id, p) in preds {
        let p = *p;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} for {id:?} not in [0, 1]")));
        }
        let assigned = if p >= cfg.pos_threshold {
            Label::Yes
        } else if p <= cfg.neg_threshold {
            Label::No
        } else {
            continue;
        };
        out.push(SilverRecord {
            id: id.clone(),
            p,
            assigned,
            round,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MergeStats {
    pub before: usize,
    pub added: usize,
    pub dedup: DedupStats,
    pub after: usize,
}

/// Appends the silver-labeled pool samples to `train` and de-duplicates.
pub fn merge(train: &Dataset, silver: &[SilverRecord], pool: &Dataset) -> Result<(Dataset, MergeStats)> {
    let train_ids: HashSet<&str> = train.iter().map(|s| s.id.as_str()).collect();
    let pool_by_id: HashMap<&str, &Sample> = pool.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut samples = train.samples().to_vec();
    for rec in silver {
        if train_ids.contains(rec.id.as_str()) {
            return Err(Error::SilverCollision(rec.id.clone()));
        }
        let src = *pool_by_id.get(rec.id.as_str()).ok_or_else(|| Error::UnknownSilverId(rec.id.clone()))?;
        samples.push(Sample {
            id: src.id.clone(),
            text: src.text.clone(),
            label: Some(rec.assigned),
            provenance: Provenance::Silver { round: rec.round },
        });
    }
    let union = Dataset::new(train.split(), samples)?;
    let (merged, dedup_stats) = dedup(&union);
    let stats = MergeStats {
        before: train.len(),
        added: silver.len(),
        after: merged.len(),
        dedup: dedup_stats,
    };
    Ok((merged, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundLog {
    pub round: u32,
    pub offered: usize,
    pub silver_positive: usize,
    pub silver_negative: usize,
    pub merge: MergeStats,
    pub training: TrainingLog,
}

#[derive(Debug)]
pub struct SelfTrainOutcome<C> {
    pub teacher: C,
    pub teacher_log: TrainingLog,
    pub model: C,
    pub rounds: Vec<RoundLog>,
    pub silver: Vec<SilverRecord>,
    pub final_train: Dataset,
}

/// Trains a teacher on `labeled`, then runs `scfg.rounds` rounds of
/// pseudo-labeling, filtering, merging and retraining from scratch.
///
/// Each round's teacher is the previous round's model, frozen while it
/// labels the pool. Pool samples labeled in an earlier round are not
/// offered again.
pub fn self_train_loop<C, F>(
    labeled: &Dataset,
    valid: &Dataset,
    pool: &Dataset,
    tcfg: &TrainConfig,
    scfg: &SelfTrainConfig,
    mut factory: F,
) -> Result<SelfTrainOutcome<C>>
where
    C: ProbabilisticClassifier + Clone,
    F: FnMut() -> Result<C>,
{
    scfg.validate()?;
    labeled.require_labeled()?;
    valid.require_labeled()?;
    let labeled_ids: HashSet<&str> = labeled.iter().map(|s| s.id.as_str()).collect();
    if let Some(s) = pool.iter().find(|s| labeled_ids.contains(s.id.as_str())) {
        return Err(Error::SilverCollision(s.id.clone()));
    }

    let mut teacher = factory()?;
    let teacher_log = teacher.fit(labeled, valid, tcfg)?;
    let first_teacher = teacher.clone();

    let mut train = labeled.clone();
    let mut labeled_in_pool: HashSet<String> = HashSet::new();
    let mut all_silver = Vec::new();
    let mut rounds = Vec::new();

    for round in 1..=scfg.rounds {
        let remaining: Vec<Sample> = pool
            .iter()
            .filter(|s| !labeled_in_pool.contains(&s.id))
            .cloned()
            .collect();
        let offer = Dataset::new(pool.split(), remaining)?;
        let preds = pseudo_label(&teacher, &offer)?;
        let silver = filter_confident(&preds, scfg, round)?;
        let silver_positive = silver.iter().filter(|r| r.assigned == Label::Yes).count();
        let silver_negative = silver.len() - silver_positive;

        let (merged, merge_stats) = merge(&train, &silver, &offer)?;
        log::info!(
            "round {round}: {} offered, {silver_positive} Yes + {silver_negative} No silver, train {} -> {} ({} removed by dedup)",
            offer.len(),
            merge_stats.before,
            merge_stats.after,
            merge_stats.dedup.removed
        );

        let mut student = factory()?;
        let training = student.fit(&merged, valid, tcfg)?;

        labeled_in_pool.extend(silver.iter().map(|r| r.id.clone()));
        all_silver.extend(silver);
        rounds.push(RoundLog {
            round,
            offered: offer.len(),
            silver_positive,
            silver_negative,
            merge: merge_stats,
            training,
        });
        train = merged;
        teacher = student;
    }

    Ok(SelfTrainOutcome {
        teacher: first_teacher,
        teacher_log,
        model: teacher,
        rounds,
        silver: all_silver,
        final_train: train,
    })
}

pub fn write_silver_jsonl(records: &[SilverRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), |w| {
        for r in records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_silver_jsonl(path: impl AsRef<Path>) -> Result<Vec<SilverRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| Error::Parse { line: idx + 1, source })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;

    fn preds(items: &[(&str, f64)]) -> Vec<(String, f64)> {
        items.iter().map(|&(id, p)| (id.to_string(), p)).collect()
    }

    #[test]
    fn filter_examples() {
        let cfg = SelfTrainConfig::default();
        let out = filter_confident(&preds(&[("a", 0.995), ("b", 0.5), ("c", 0.005)]), &cfg, 1).unwrap();
        let got: Vec<(&str, Label)> = out.iter().map(|r| (r.id.as_str(), r.assigned)).collect();
        assert_eq!(got, vec![("a", Label::Yes), ("c", Label::No)]);

        let edge = filter_confident(&preds(&[("d", 0.99), ("e", 0.01)]), &cfg, 1).unwrap();
        assert_eq!(edge[0].assigned, Label::Yes);
        assert_eq!(edge[1].assigned, Label::No);

        let none = filter_confident(&preds(&[("f", 0.011), ("g", 0.989)]), &cfg, 1).unwrap();
        assert!(none.is_empty());

        assert!(filter_confident(&preds(&[("h", 1.5)]), &cfg, 1).is_err());
    }

    #[test]
    fn config_invariants() {
        assert!(SelfTrainConfig::default().validate().is_ok());
        for (neg, pos, rounds) in [(0.5, 0.4, 1), (0.0, 0.9, 1), (0.1, 1.0, 1), (0.1, 0.9, 0)] {
            let cfg = SelfTrainConfig {
                pos_threshold: pos,
                neg_threshold: neg,
                rounds,
            };
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    fn train_and_pool() -> (Dataset, Dataset) {
        let train = Dataset::new(
            Split::Train,
            vec![
                Sample::labeled("t1", "gold one", Label::Yes),
                Sample::labeled("t2", "gold two", Label::No),
            ],
        )
        .unwrap();
        let pool = Dataset::new(
            Split::Pool,
            vec![
                Sample::unlabeled("p1", "pool one"),
                Sample::unlabeled("p2", "gold two"),
                Sample::unlabeled("p3", "pool three"),
            ],
        )
        .unwrap();
        (train, pool)
    }

    fn silver(id: &str, assigned: Label) -> SilverRecord {
        SilverRecord {
            id: id.into(),
            p: if assigned == Label::Yes { 1.0 } else { 0.0 },
            assigned,
            round: 1,
        }
    }

    #[test]
    fn merge_appends_with_provenance() {
        let (train, pool) = train_and_pool();
        let (merged, stats) = merge(&train, &[silver("p1", Label::Yes)], &pool).unwrap();
        assert_eq!(merged.len(), 3);
        let s = merged.get("p1").unwrap();
        assert_eq!(s.label, Some(Label::Yes));
        assert_eq!(s.provenance, Provenance::Silver { round: 1 });
        assert_eq!((stats.before, stats.added, stats.after), (2, 1, 3));
    }

    #[test]
    fn merge_empty_is_dedup() {
        let (train, pool) = train_and_pool();
        let (merged, _) = merge(&train, &[], &pool).unwrap();
        assert_eq!(merged, dedup(&train).0);
    }

    #[test]
    fn merge_conflict_drops_gold_and_silver() {
        let (train, pool) = train_and_pool();
        // p2 repeats t2's text with the opposite label.
        let (merged, stats) = merge(&train, &[silver("p2", Label::Yes)], &pool).unwrap();
        assert!(merged.get("t2").is_none());
        assert!(merged.get("p2").is_none());
        assert_eq!(stats.dedup.conflicts.len(), 1);
        assert_eq!(stats.after, stats.before + stats.added - stats.dedup.removed);
    }

    #[test]
    fn merge_errors() {
        let (train, pool) = train_and_pool();
        assert!(matches!(
            merge(&train, &[silver("zz", Label::Yes)], &pool),
            Err(Error::UnknownSilverId(_))
        ));
        let pool2 = Dataset::new(Split::Pool, vec![Sample::unlabeled("t1", "x")]).unwrap();
        assert!(matches!(
            merge(&train, &[silver("t1", Label::Yes)], &pool2),
            Err(Error::SilverCollision(_))
        ));
    }

    #[test]
    fn silver_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("silver.jsonl");
        let recs = vec![silver("a", Label::Yes), silver("b", Label::No)];
        write_silver_jsonl(&recs, &path).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("{\"id\":\"a\",\"p\":1.0,\"assigned\":\"Yes\",\"round\":1}\n"));
        assert_eq!(read_silver_jsonl(&path).unwrap(), recs);
    }
}
