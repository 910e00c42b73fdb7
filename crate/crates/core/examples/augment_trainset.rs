//! Builds an augmented train set: 10% of each technique's copies are merged
//! into the originals and the union is de-duplicated.
//!
//! cargo run --example augment_trainset [fraction]

use selftrain_kit::augment::{build_augmented_trainset, AugmentConfig};
use selftrain_kit::corpus::{Dataset, Sample, Split};
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

/// Generated texts are lowercase words only; capitalize them and sprinkle in
/// links and mentions so every technique has something to change.
fn decorate(d: &Dataset) -> Dataset {
    let samples = d
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut text = s.text[..1].to_uppercase() + &s.text[1..];
            match i % 3 {
                0 => text.push_str(" see https://example.org/post"),
                1 => text.insert_str(0, "@someone "),
                _ => {}
            }
            Sample { text, ..s.clone() }
        })
        .collect();
    Dataset::new(Split::Train, samples).expect("ids unchanged")
}

fn main() -> selftrain_kit::Result<()> {
    let fraction = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.10);
    let corpus = SyntheticCorpus::generate(&SyntheticConfig::default());
    let cfg = AugmentConfig { fraction, ..AugmentConfig::default() };
    let train = decorate(&corpus.labeled);
    let out = build_augmented_trainset(&train, &cfg)?;

    let s = &out.summary;
    println!("originals: {}", s.originals);
    for t in &s.techniques {
        println!("  {:<10} sampled {:>4}, kept {:>4}", t.technique.name(), t.sampled, t.kept);
    }
    println!("dedup removed {} ({} label conflicts)", s.dedup.removed, s.dedup.conflicts.len());
    println!("output: {} Yes / {} No", s.output.positive, s.output.negative);
    for sample in out.dataset.iter().filter(|x| x.id.contains('#')).step_by(40).take(4) {
        println!("  {} [{}] {:.60}...", sample.id, sample.provenance, sample.text);
    }
    Ok(())
}
