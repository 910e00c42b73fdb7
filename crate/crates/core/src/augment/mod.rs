//! Training-set augmentation: anonymization, case variants and
//! homoglyphication of copied samples, a per-technique fraction of which is
//! merged back into the originals before de-duplication.

mod anonymize;
mod confusables;

pub use anonymize::{
    anonymize, EMAIL_PATTERN, EMAIL_TAG, PHONE_PATTERN, PHONE_TAG, URL_PATTERN, URL_TAG,
    USER_PATTERN, USER_TAG,
};
pub use confusables::{homoglyphify, ConfusablesTable};

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{dedup, ClassCounts, Dataset, DedupStats, Provenance, Sample};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, text_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Anonymize,
    Lowercase,
    Uppercase,
    Homoglyph,
}

impl Technique {
    /// Fixed application order.
    pub const ALL: [Technique; 4] = [
        Technique::Anonymize,
        Technique::Lowercase,
        Technique::Uppercase,
        Technique::Homoglyph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Anonymize => "anonymize",
            Technique::Lowercase => "lowercase",
            Technique::Uppercase => "uppercase",
            Technique::Homoglyph => "homoglyph",
        }
    }

    /// Suffix appended to the source id of a copy, as in `id#lower`.
    pub fn id_suffix(self) -> &'static str {
        match self {
            Technique::Anonymize => "anon",
            Technique::Lowercase => "lower",
            Technique::Uppercase => "upper",
            Technique::Homoglyph => "homoglyph",
        }
    }

    pub fn provenance(self) -> Provenance {
        match self {
            Technique::Anonymize => Provenance::Anonymized,
            Technique::Lowercase => Provenance::Lowercased,
            Technique::Uppercase => Provenance::Uppercased,
            Technique::Homoglyph => Provenance::Homoglyphed,
        }
    }

    fn index(self) -> u64 {
        Technique::ALL.iter().position(|&t| t == self).unwrap() as u64
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown augmentation technique {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub fraction: f64,
    pub seed: u64,
    pub techniques: Vec<Technique>,
    pub homoglyph_rate: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            fraction: 0.10,
            seed: 0,
            techniques: Technique::ALL.to_vec(),
            homoglyph_rate: 1.0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::Config(format!("augment.fraction {} not in [0, 1]", self.fraction)));
        }
        if !(0.0..=1.0).contains(&self.homoglyph_rate) {
            return Err(Error::Config(format!(
                "augment.homoglyph_rate {} not in [0, 1]",
                self.homoglyph_rate
            )));
        }
        if self.techniques.is_empty() {
            return Err(Error::Config("augment.techniques is empty".into()));
        }
        Ok(())
    }

    /// Enabled techniques in the fixed application order, without repeats.
    pub fn ordered_techniques(&self) -> Vec<Technique> {
        Technique::ALL
            .into_iter()
            .filter(|t| self.techniques.contains(t))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseMode {
    Lower,
    Upper,
}

/// Full Unicode case mapping; the output may differ in length (`ß` → `SS`).
pub fn case_variant(text: &str, mode: CaseMode) -> String {
    match mode {
        CaseMode::Lower => text.to_lowercase(),
        CaseMode::Upper => text.to_uppercase(),
    }
}

/// Number of samples kept by [`sample_fraction`]: `floor(fraction * n)`.
///
/// A small tolerance absorbs binary rounding, so 0.29 of 100 is 29.
pub fn fraction_count(n: usize, fraction: f64) -> usize {
    let exact = fraction * n as f64;
    ((exact + 1e-9).floor() as usize).min(n)
}

/// Seeded uniform sample without replacement of `floor(fraction * |d|)`
/// samples, in their original order.
pub fn sample_fraction(d: &Dataset, fraction: f64, seed: u64) -> Dataset {
    let picks = sampled_indices(d.len(), fraction, seed);
    let samples = picks.into_iter().map(|i| d.samples()[i].clone()).collect();
    Dataset::from_unique(d.split(), samples)
}

fn sampled_indices(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let k = fraction_count(n, fraction);
    if k == n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, n, k).into_vec();
    picks.sort_unstable();
    picks
}

/// Applies one technique to a single text.
pub fn apply_technique(technique: Technique, text: &str, config: &AugmentConfig, sample_seed: u64) -> String {
    match technique {
        Technique::Anonymize => anonymize(text),
        Technique::Lowercase => case_variant(text, CaseMode::Lower),
        Technique::Uppercase => case_variant(text, CaseMode::Upper),
        Technique::Homoglyph => homoglyphify(
            text,
            ConfusablesTable::builtin(),
            config.homoglyph_rate,
            sample_seed,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TechniqueSummary {
    pub technique: Technique,
    /// Copies produced (one per train sample).
    pub copies: usize,
    /// Copies kept by fractional sampling.
    pub sampled: usize,
    /// Sampled copies that survived de-duplication.
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentSummary {
    pub originals: usize,
    pub techniques: Vec<TechniqueSummary>,
    pub before_dedup: usize,
    pub dedup: DedupStats,
    pub output: ClassCounts,
}

#[derive(Debug, Clone)]
pub struct Augmented {
    pub dataset: Dataset,
    pub summary: AugmentSummary,
}

/// Builds the augmented train set: originals, then the sampled copies of
/// each enabled technique in fixed order, then de-duplication.
pub fn build_augmented_trainset(train: &Dataset, config: &AugmentConfig) -> Result<Augmented> {
    config.validate()?;
    train.require_labeled()?;

    let mut samples: Vec<Sample> = train.samples().to_vec();
    let mut techniques = Vec::new();
    for technique in config.ordered_techniques() {
        let technique_seed = derive_seed(config.seed, technique.index());
        let picks = sampled_indices(train.len(), config.fraction, technique_seed);
        let copies: Vec<Sample> = picks
            .par_iter()
            .map(|&i| {
                let src = &train.samples()[i];
                let sample_seed = derive_seed(technique_seed, text_seed(&src.id));
                Sample {
                    id: format!("{}#{}", src.id, technique.id_suffix()),
                    text: apply_technique(technique, &src.text, config, sample_seed),
                    label: src.label,
                    provenance: technique.provenance(),
                }
            })
            .collect();
        techniques.push(TechniqueSummary {
            technique,
            copies: train.len(),
            sampled: copies.len(),
            kept: 0,
        });
        samples.extend(copies);
    }

    let before_dedup = samples.len();
    let combined = Dataset::new(train.split(), samples)?;
    let (dataset, dedup_stats) = dedup(&combined);
    for t in &mut techniques {
        let prov = t.technique.provenance();
        t.kept = dataset.iter().filter(|s| s.provenance == prov).count();
    }
    let summary = AugmentSummary {
        originals: train.len(),
        techniques,
        before_dedup,
        dedup: dedup_stats,
        output: dataset.class_counts(),
    };
    log::info!(
        "augment: {} originals + {} copies -> {} after dedup ({} removed)",
        summary.originals,
        before_dedup - summary.originals,
        dataset.len(),
        summary.dedup.removed
    );
    Ok(Augmented { dataset, summary })
}
