//! Holds out a fixed number of samples per class for validation.
//!
//! cargo run --example stratified_split [per_class] [seed]

use selftrain_kit::corpus::{stratified_holdout, validate, MAX_CHARS, MIN_CHARS};
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> selftrain_kit::Result<()> {
    let mut args = std::env::args().skip(1);
    let per_class = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let full = SyntheticCorpus::generate(&SyntheticConfig::default()).labeled;
    let report = validate(&full, MIN_CHARS, MAX_CHARS);
    println!(
        "{} samples, {} outside [{MIN_CHARS}, {MAX_CHARS}] chars, {} duplicate texts",
        report.total,
        report.length_violations.len(),
        report.duplicate_texts
    );

    let (train, holdout) = stratified_holdout(&full, per_class, seed)?;
    let (t, h) = (train.class_counts(), holdout.class_counts());
    println!("train:   {} Yes / {} No", t.positive, t.negative);
    println!("holdout: {} Yes / {} No", h.positive, h.negative);
    Ok(())
}
