//! Scores a grid of decision thresholds on validation data; ties go to the
//! smallest threshold.
//!
//! cargo run --release --example threshold_sweep

use selftrain_kit::eval::{render_table, threshold_sweep};
use selftrain_kit::model::{LogisticModel, ProbabilisticClassifier, TrainConfig};
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> selftrain_kit::Result<()> {
    // Heavy shared-vocabulary noise so thresholds actually matter.
    let corpus = SyntheticCorpus::generate(&SyntheticConfig { noise_rate: 0.97, ..SyntheticConfig::default() });
    let mut model = LogisticModel::default();
    model.fit(&corpus.labeled, &corpus.holdout, &TrainConfig::default())?;

    let grid = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    let sweep = threshold_sweep(&model, &corpus.holdout, &grid)?;
    let rows: Vec<(String, f64)> = sweep.points.iter().map(|r| (format!("th{}", r.threshold), r.macro_f1)).collect();
    print!("{}", render_table(&rows));
    println!("best threshold: {} (macro F1 {:.4})", sweep.best_threshold, sweep.best().macro_f1);
    Ok(())
}
