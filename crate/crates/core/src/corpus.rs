//! Labeled and unlabeled text datasets: JSONL ingestion, validation,
//! stratified holdout splitting and exact-text de-duplication.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Default inclusive length bounds, in Unicode scalar values.
pub const MIN_CHARS: usize = 160;
pub const MAX_CHARS: usize = 1000;

/// Binary label. `Yes` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "Yes",
            Label::No => "No",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Yes
    }

    /// 1.0 for `Yes`, 0.0 for `No`.
    pub fn target(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Yes" => Ok(Label::Yes),
            "No" => Ok(Label::No),
            other => Err(other.to_string()),
        }
    }
}

/// Where a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Original,
    Anonymized,
    Lowercased,
    Uppercased,
    Homoglyphed,
    Silver { round: u32 },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => f.write_str("original"),
            Provenance::Anonymized => f.write_str("anonymized"),
            Provenance::Lowercased => f.write_str("lowercased"),
            Provenance::Uppercased => f.write_str("uppercased"),
            Provenance::Homoglyphed => f.write_str("homoglyphed"),
            Provenance::Silver { round } => write!(f, "silver:{round}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "original" => Provenance::Original,
            "anonymized" => Provenance::Anonymized,
            "lowercased" => Provenance::Lowercased,
            "uppercased" => Provenance::Uppercased,
            "homoglyphed" => Provenance::Homoglyphed,
            other => {
                let round = other
                    .strip_prefix("silver:")
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| other.to_string())?;
                Provenance::Silver { round }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
    pub provenance: Provenance,
}

impl Sample {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Self {
        Sample {
            id: id.into(),
            text: text.into(),
            label,
            provenance: Provenance::Original,
        }
    }

    pub fn labeled(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        Self::new(id, text, Some(label))
    }

    pub fn unlabeled(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self::new(id, text, None)
    }

    pub fn char_count(&self) -> usize {
        self.text.chars().count()
    }

    /// The label, or [`Error::Unlabeled`] naming this sample.
    pub fn require_label(&self) -> Result<Label> {
        self.label.ok_or_else(|| Error::Unlabeled(self.id.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Holdout,
    Pool,
    Test,
}

impl Split {
    /// Whether samples of this split are expected to carry gold labels.
    pub fn is_labeled(self) -> bool {
        matches!(self, Split::Train | Split::Holdout)
    }
}

/// Ordered collection of samples with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    split: Split,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(split: Split, samples: Vec<Sample>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if s.id.is_empty() {
                return Err(Error::Domain("sample id must be non-empty".into()));
            }
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
        }
        Ok(Dataset { split, samples })
    }

    pub fn empty(split: Split) -> Self {
        Dataset {
            split,
            samples: Vec::new(),
        }
    }

    /// Internal constructor for callers that already guarantee id uniqueness.
    pub(crate) fn from_unique(split: Split, samples: Vec<Sample>) -> Self {
        debug_assert!(Dataset::new(split, samples.clone()).is_ok());
        Dataset { split, samples }
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Counts of (positive, negative) labels; unlabeled samples are not counted.
    pub fn class_counts(&self) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for s in &self.samples {
            match s.label {
                Some(Label::Yes) => counts.positive += 1,
                Some(Label::No) => counts.negative += 1,
                None => counts.unlabeled += 1,
            }
        }
        counts
    }

    pub fn get(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Error unless every sample carries a label.
    pub fn require_labeled(&self) -> Result<()> {
        self.samples.iter().try_for_each(|s| s.require_label().map(|_| ()))
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Sample;
    type IntoIter = std::slice::Iter<'a, Sample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
    pub unlabeled: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

/// Reads a JSONL dataset. Blank lines are skipped; unknown fields are ignored.
pub fn load_jsonl(path: impl AsRef<Path>, split: Split) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(BufReader::new(file), split).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_jsonl(reader: impl BufRead, split: Split) -> Result<Dataset> {
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|source| Error::Parse { line: line_no, source })?;
        let label = record
            .label
            .map(|l| {
                l.parse::<Label>()
                    .map_err(|value| Error::InvalidLabel { line: line_no, value })
            })
            .transpose()?;
        let provenance = match record.provenance {
            Some(p) => p
                .parse()
                .map_err(|p| Error::Domain(format!("line {line_no}: unknown provenance {p:?}")))?,
            None => Provenance::Original,
        };
        samples.push(Sample {
            id: record.id,
            text: record.text,
            label,
            provenance,
        });
    }
    Dataset::new(split, samples)
}

/// Serializes a dataset as JSONL, one object per line with a trailing newline.
pub fn to_jsonl(d: &Dataset) -> String {
    let mut out = String::new();
    for s in d {
        let record = Record {
            id: s.id.clone(),
            text: s.text.clone(),
            label: s.label.map(|l| l.as_str().to_string()),
            provenance: (s.provenance != Provenance::Original).then(|| s.provenance.to_string()),
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let body = to_jsonl(d);
    write_atomic(path.as_ref(), |w| w.write_all(body.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub total: usize,
    pub length_violations: Vec<(String, usize)>,
    pub label_violations: Vec<String>,
    pub duplicate_texts: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.length_violations.is_empty()
            && self.label_violations.is_empty()
            && self.duplicate_texts == 0
    }
}

/// Reports length, label and duplicate problems. Bounds are inclusive.
pub fn validate(d: &Dataset, min_chars: usize, max_chars: usize) -> ValidationReport {
    let length_violations = d
        .iter()
        .map(|s| (s, s.char_count()))
        .filter(|&(_, n)| n < min_chars || n > max_chars)
        .map(|(s, n)| (s.id.clone(), n))
        .collect();
    let label_violations = if d.split().is_labeled() {
        d.iter()
            .filter(|s| s.label.is_none())
            .map(|s| s.id.clone())
            .collect()
    } else {
        Vec::new()
    };
    let distinct: HashSet<&str> = d.iter().map(|s| s.text.as_str()).collect();
    ValidationReport {
        total: d.len(),
        length_violations,
        label_violations,
        duplicate_texts: d.len() - distinct.len(),
    }
}

/// Draws `per_class` samples of each class into a holdout set using seeded
/// uniform sampling without replacement. Both outputs keep input order.
pub fn stratified_holdout(d: &Dataset, per_class: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if d.split() != Split::Train {
        return Err(Error::Domain(format!(
            "stratified_holdout expects a train split, got {:?}",
            d.split()
        )));
    }
    d.require_labeled()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_holdout = vec![false; d.len()];
    for class in [Label::Yes, Label::No] {
        let members: Vec<usize> = d
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == Some(class))
            .map(|(i, _)| i)
            .collect();
        if members.len() < per_class {
            return Err(Error::InsufficientClass {
                class,
                available: members.len(),
                requested: per_class,
            });
        }
        for pick in index::sample(&mut rng, members.len(), per_class) {
            in_holdout[members[pick]] = true;
        }
    }

    let (mut train, mut holdout) = (Vec::new(), Vec::new());
    for (s, &held) in d.iter().zip(&in_holdout) {
        if held {
            holdout.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    Ok((
        Dataset::from_unique(Split::Train, train),
        Dataset::from_unique(Split::Holdout, holdout),
    ))
}

/// A group of byte-identical texts whose labels disagreed; all were dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DedupConflict {
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DedupStats {
    pub removed: usize,
    pub conflicts: Vec<DedupConflict>,
}

/// Removes byte-identical texts. Keeps the first occurrence when labels
/// agree; drops every copy when they conflict.
pub fn dedup(d: &Dataset) -> (Dataset, DedupStats) {
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, s) in d.iter().enumerate() {
        groups.entry(s.text.as_str()).or_default().push(i);
    }

    let mut keep = vec![false; d.len()];
    let mut conflicts = Vec::new();
    for members in groups.values() {
        let first = &d.samples[members[0]];
        if members.iter().all(|&i| d.samples[i].label == first.label) {
            keep[members[0]] = true;
        } else {
            let mut sorted = members.clone();
            sorted.sort_unstable();
            conflicts.push(DedupConflict {
                ids: sorted.iter().map(|&i| d.samples[i].id.clone()).collect(),
            });
        }
    }
    // HashMap iteration order is not stable.
    conflicts.sort_by(|a, b| a.ids.cmp(&b.ids));
    for c in &conflicts {
        log::warn!("dedup: conflicting labels for identical text, dropped {:?}", c.ids);
    }

    let survivors: Vec<Sample> = d
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(s, _)| s.clone())
        .collect();
    let removed = d.len() - survivors.len();
    (
        Dataset::from_unique(d.split(), survivors),
        DedupStats { removed, conflicts },
    )
}
