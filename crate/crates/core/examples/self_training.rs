//! Teacher training, pseudo-labeling and retraining on a generated corpus,
//! with silver labels checked against the generator's hidden truth.
//!
//! cargo run --release --example self_training [seed]

use selftrain_kit::eval::evaluate;
use selftrain_kit::model::{DecisionRule, LogisticModel, TrainConfig};
use selftrain_kit::selftrain::{self_train_loop, SelfTrainConfig};
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> selftrain_kit::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    });
    let tcfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let out = self_train_loop(
        &corpus.labeled,
        &corpus.holdout,
        &corpus.pool,
        &tcfg,
        &SelfTrainConfig::default(),
        || Ok(LogisticModel::default()),
    )?;

    let rule = DecisionRule::default();
    let teacher = evaluate(&out.teacher, &corpus.holdout, rule)?;
    let student = evaluate(&out.model, &corpus.holdout, rule)?;
    let correct = out
        .silver
        .iter()
        .filter(|r| corpus.pool_truth[&r.id] == r.assigned)
        .count();

    let r = &out.rounds[0];
    println!("pool offered:     {}", r.offered);
    println!("silver Yes / No:  {} / {}", r.silver_positive, r.silver_negative);
    println!("silver accuracy:  {correct}/{}", out.silver.len());
    println!("train size:       {} -> {}", r.merge.before, r.merge.after);
    println!("teacher macro F1: {:.4} (step {})", teacher.macro_f1, out.teacher_log.selected_step);
    println!("student macro F1: {:.4} (step {})", student.macro_f1, r.training.selected_step);
    Ok(())
}
