//! Trains the hashed n-gram logistic model with warmup-cosine AdamW and
//! picks the checkpoint with the best validation macro F1.
//!
//! cargo run --release --example train_native [eval_every]

use selftrain_kit::eval::{evaluate, render_table, variant_name};
use selftrain_kit::model::{DecisionRule, LogisticModel, ProbabilisticClassifier, TrainConfig};
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> selftrain_kit::Result<()> {
    let eval_every = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let corpus = SyntheticCorpus::generate(&SyntheticConfig { noise_rate: 0.95, ..SyntheticConfig::default() });
    let cfg = TrainConfig { eval_every_steps: eval_every, ..TrainConfig::default() };

    let mut model = LogisticModel::default();
    let log = model.fit(&corpus.labeled, &corpus.holdout, &cfg)?;
    println!("{} steps, {} warmup", log.total_steps, log.warmup_steps);
    for r in &log.records {
        println!("  step {:>4}  lr {:.4}  valid macro F1 {:.4}", r.step, r.lr, r.macro_f1);
    }
    println!("selected step {}", log.selected_step);

    let mut rows = Vec::new();
    for t in [0.5, 0.7] {
        let rule = DecisionRule::new(t)?;
        rows.push((variant_name("native", false, rule), evaluate(&model, &corpus.holdout, rule)?.macro_f1));
    }
    print!("{}", render_table(&rows));

    let path = std::env::temp_dir().join("selftrain-kit-model.json");
    model.save(&path)?;
    let reloaded = LogisticModel::load(&path)?;
    let text = &corpus.holdout.samples()[0].text;
    assert_eq!(model.predict_proba(text)?, reloaded.predict_proba(text)?);
    println!("artifact -> {}", path.display());
    Ok(())
}
