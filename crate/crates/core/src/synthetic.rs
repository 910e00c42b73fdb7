//! Seeded generator of linearly separable two-class corpora, keeping the
//! true label of every pool sample for auditing pseudo-labels.
//!
//! Each class draws words from its own vocabulary (built from disjoint
//! consonant inventories); with probability `noise_rate` a word comes from a
//! vocabulary shared by both classes instead.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Label, Sample, Split};

const VOWELS: &[u8] = b"aeiou";
const POSITIVE_CONSONANTS: &[u8] = b"bdfgkm";
const NEGATIVE_CONSONANTS: &[u8] = b"prstvz";
const SHARED_CONSONANTS: &[u8] = b"hlnwjy";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub labeled: usize,
    pub holdout: usize,
    pub pool: usize,
    pub noise_rate: f64,
    pub vocab_size: usize,
    pub shared_vocab_size: usize,
    pub min_chars: usize,
    pub max_chars: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            labeled: 600,
            holdout: 200,
            pool: 2000,
            noise_rate: 0.05,
            vocab_size: 200,
            shared_vocab_size: 100,
            min_chars: 160,
            max_chars: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub labeled: Dataset,
    pub holdout: Dataset,
    /// Unlabeled; true labels are in `pool_truth`.
    pub pool: Dataset,
    pub pool_truth: HashMap<String, Label>,
}

struct Vocabularies {
    positive: Vec<String>,
    negative: Vec<String>,
    shared: Vec<String>,
}

fn make_vocab(rng: &mut ChaCha8Rng, consonants: &[u8], size: usize) -> Vec<String> {
    let mut words = std::collections::BTreeSet::new();
    while words.len() < size {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*consonants.choose(rng).unwrap() as char);
            w.push(*VOWELS.choose(rng).unwrap() as char);
        }
        words.insert(w);
    }
    let mut words: Vec<String> = words.into_iter().collect();
    words.shuffle(rng);
    words
}

impl SyntheticCorpus {
    pub fn generate(cfg: &SyntheticConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let vocab = Vocabularies {
            positive: make_vocab(&mut rng, POSITIVE_CONSONANTS, cfg.vocab_size),
            negative: make_vocab(&mut rng, NEGATIVE_CONSONANTS, cfg.vocab_size),
            shared: make_vocab(&mut rng, SHARED_CONSONANTS, cfg.shared_vocab_size),
        };

        let labeled = balanced(&mut rng, cfg.labeled);
        let holdout = balanced(&mut rng, cfg.holdout);
        let pool_labels: Vec<Label> = (0..cfg.pool)
            .map(|_| if rng.gen_bool(0.5) { Label::Yes } else { Label::No })
            .collect();

        let make = |prefix: &str, labels: &[Label], rng: &mut ChaCha8Rng| -> Vec<Sample> {
            labels
                .iter()
                .enumerate()
                .map(|(i, &label)| Sample::labeled(format!("{prefix}{i:05}"), text(rng, &vocab, label, cfg), label))
                .collect()
        };
        let labeled = make("train-", &labeled, &mut rng);
        let holdout = make("holdout-", &holdout, &mut rng);
        let pool = make("pool-", &pool_labels, &mut rng);

        let pool_truth = pool.iter().map(|s| (s.id.clone(), s.label.unwrap())).collect();
        let pool = pool
            .into_iter()
            .map(|s| Sample::unlabeled(s.id, s.text))
            .collect();
        SyntheticCorpus {
            labeled: Dataset::new(Split::Train, labeled).expect("generated ids are unique"),
            holdout: Dataset::new(Split::Holdout, holdout).expect("generated ids are unique"),
            pool: Dataset::new(Split::Pool, pool).expect("generated ids are unique"),
            pool_truth,
        }
    }
}

fn balanced(rng: &mut ChaCha8Rng, n: usize) -> Vec<Label> {
    let mut labels: Vec<Label> = (0..n).map(|i| if i % 2 == 0 { Label::Yes } else { Label::No }).collect();
    labels.shuffle(rng);
    labels
}

fn text(rng: &mut ChaCha8Rng, vocab: &Vocabularies, label: Label, cfg: &SyntheticConfig) -> String {
    let target = rng.gen_range(cfg.min_chars..=cfg.max_chars);
    let own = match label {
        Label::Yes => &vocab.positive,
        Label::No => &vocab.negative,
    };
    let mut out = String::with_capacity(target + 8);
    loop {
        let word = if rng.gen_bool(cfg.noise_rate) {
            vocab.shared.choose(rng).unwrap()
        } else {
            own.choose(rng).unwrap()
        };
        let needed = word.len() + usize::from(!out.is_empty());
        if out.len() + needed > cfg.max_chars {
            break;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
        if out.len() >= target {
            break;
        }
    }
    out
}
