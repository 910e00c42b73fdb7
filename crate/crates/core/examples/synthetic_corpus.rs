//! Writes a generated two-class corpus as JSONL, ready for the CLI.
//!
//! cargo run --example synthetic_corpus -- data/
//!
//! Produces train.jsonl (labeled), holdout.jsonl, pool.jsonl (unlabeled)
//! and pool_truth.jsonl (the pool's hidden labels, in predictions format).

use std::path::PathBuf;

use selftrain_kit::corpus::write_jsonl;
use selftrain_kit::eval::write_predictions;
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    let corpus = SyntheticCorpus::generate(&SyntheticConfig::default());

    write_jsonl(&corpus.labeled, dir.join("train.jsonl"))?;
    write_jsonl(&corpus.holdout, dir.join("holdout.jsonl"))?;
    write_jsonl(&corpus.pool, dir.join("pool.jsonl"))?;
    let ids: Vec<String> = corpus.pool.iter().map(|s| s.id.clone()).collect();
    let truth: Vec<_> = ids.iter().map(|id| corpus.pool_truth[id]).collect();
    write_predictions(&ids, &truth, dir.join("pool_truth.jsonl"))?;

    println!(
        "{} labeled, {} holdout, {} pool samples -> {}",
        corpus.labeled.len(),
        corpus.holdout.len(),
        corpus.pool.len(),
        dir.display()
    );
    Ok(())
}
