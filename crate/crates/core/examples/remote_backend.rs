//! Uses a remote classifier service through the same trait as the native
//! model.
//!
//! cargo run --example remote_backend -- http://127.0.0.1:8000
//!
//! The service must implement `/health`, `/train` and `/predict_proba`
//! (see the `remote` module docs).

use selftrain_kit::eval::evaluate;
use selftrain_kit::model::{DecisionRule, ProbabilisticClassifier, TrainConfig};
use selftrain_kit::remote::RemoteClassifier;
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

fn main() -> selftrain_kit::Result<()> {
    let url = std::env::args().nth(1).unwrap_or_else(|| "http://127.0.0.1:8000".into());
    let mut client = RemoteClassifier::connect(&url)?;
    println!("connected to {} (model {:?})", client.base_url(), client.model_name());

    let corpus = SyntheticCorpus::generate(&SyntheticConfig { labeled: 100, holdout: 40, pool: 0, ..SyntheticConfig::default() });
    let log = client.fit(&corpus.labeled, &corpus.holdout, &TrainConfig::default())?;
    println!("remote training done, best validation macro F1 {:.4}", log.best_macro_f1);

    let report = evaluate(&client, &corpus.holdout, DecisionRule::default())?;
    println!("holdout macro F1 {:.4}", report.macro_f1);
    Ok(())
}
