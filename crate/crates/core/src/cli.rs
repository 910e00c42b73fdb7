//! `selftrain` command-line interface.
//!
//! Every subcommand reads its defaults from an optional TOML config
//! (`--config`); explicit flags win. Logs go to stderr; with `--json` a
//! machine-readable summary is printed to stdout.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::augment::{build_augmented_trainset, Technique};
use crate::backend::{BackendSpec, Classifier};
use crate::config::PipelineConfig;
use crate::corpus::{load_jsonl, stratified_holdout, validate, write_jsonl, Dataset, Sample, Split};
use crate::error::{Error, Result};
use crate::eval::{
    align_predictions, confusion, default_grid, evaluate, read_predictions, render_table, threshold_sweep,
    variant_name, write_predictions, EvalReport,
};
use crate::io::write_json;
use crate::model::{decide, DecisionRule, ProbabilisticClassifier};
use crate::selftrain::{self_train_loop, write_silver_jsonl};

#[derive(Debug, Parser)]
#[command(name = "selftrain", version, about = "Self-training text classification pipeline")]
pub struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print a JSON summary to stdout.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report length, label and duplicate problems in a dataset.
    Validate(ValidateArgs),
    /// Split a labeled train file into train and a per-class holdout.
    Split(SplitArgs),
    /// Build the augmented, de-duplicated train set.
    Augment(AugmentArgs),
    /// Train a classifier with best-checkpoint selection.
    Train(TrainArgs),
    /// Teacher training, pseudo-labeling, merging and retraining.
    Selftrain(SelfTrainArgs),
    /// Write Yes/No predictions for a dataset.
    Predict(PredictArgs),
    /// Score a model or a predictions file against gold labels.
    Eval(EvalArgs),
    /// Evaluate a grid of decision thresholds on a labeled set.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_split, default_value = "train")]
    pub split: Split,
    #[arg(long)]
    pub min_chars: Option<usize>,
    #[arg(long)]
    pub max_chars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub holdout_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long = "in", alias = "input")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of anonymize,lowercase,uppercase,homoglyph.
    #[arg(long, value_delimiter = ',')]
    pub techniques: Option<Vec<String>>,
    #[arg(long)]
    pub homoglyph_rate: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct BackendArgs {
    /// Use the remote classifier service at this URL instead of the native model.
    #[arg(long)]
    pub backend_url: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct TrainOverrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub peak_lr: Option<f64>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    #[arg(long)]
    pub out_model: PathBuf,
    /// Training log (JSON).
    #[arg(long)]
    pub out_log: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: TrainOverrides,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct SelfTrainArgs {
    #[arg(long)]
    pub labeled: Option<PathBuf>,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Unlabeled pool file; repeat to pool several (e.g. dev and test).
    #[arg(long)]
    pub pool: Vec<PathBuf>,
    #[arg(long)]
    pub out_model: PathBuf,
    #[arg(long)]
    pub out_silver: Option<PathBuf>,
    /// Provenance log (JSON).
    #[arg(long)]
    pub out_log: Option<PathBuf>,
    #[arg(long)]
    pub rounds: Option<u32>,
    #[command(flatten)]
    pub overrides: TrainOverrides,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Labeled JSONL with gold labels.
    #[arg(long)]
    pub golds: PathBuf,
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    pub model: Option<PathBuf>,
    /// Predictions JSONL (`{"id","label"}`) to score instead of a model.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Base detector name used in the report label.
    #[arg(long, default_value = "native")]
    pub name: String,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub valid: PathBuf,
    /// Comma-separated thresholds in (0, 1); defaults to 0.05..0.95.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "holdout" => Ok(Split::Holdout),
        "pool" => Ok(Split::Pool),
        "test" => Ok(Split::Test),
        other => Err(format!("unknown split {other:?}")),
    }
}

/// Outcome of a command: a JSON summary and its human-readable rendering.
pub struct Output {
    pub summary: serde_json::Value,
    pub text: String,
}

pub fn run(cli: Cli) -> Result<Output> {
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Validate(a) => cmd_validate(&config, a),
        Command::Split(a) => cmd_split(&config, a),
        Command::Augment(a) => cmd_augment(&config, a),
        Command::Train(a) => cmd_train(&config, a),
        Command::Selftrain(a) => cmd_selftrain(&config, a),
        Command::Predict(a) => cmd_predict(&config, a),
        Command::Eval(a) => cmd_eval(&config, a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone())
        .ok_or_else(|| Error::Config(format!("--{name} not given and not set in config")))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("summary serializes")
}

fn backend_spec(config: &PipelineConfig, args: &BackendArgs) -> BackendSpec {
    match &args.backend_url {
        Some(url) => BackendSpec::Remote { url: url.clone() },
        None => config.backend.clone(),
    }
}

fn train_config(config: &PipelineConfig, o: &TrainOverrides) -> Result<crate::model::TrainConfig> {
    let mut t = config.train.clone();
    if let Some(s) = o.seed {
        t.seed = s;
    }
    if let Some(lr) = o.peak_lr {
        t.peak_lr = lr;
    }
    if let Some(e) = o.eval_every {
        t.eval_every_steps = e;
    }
    if let Some(e) = o.epochs {
        t.epochs = e;
    }
    t.validate()?;
    Ok(t)
}

fn decision_rule(config: &PipelineConfig, flag: Option<f64>) -> Result<DecisionRule> {
    match flag {
        Some(t) => DecisionRule::new(t),
        None => Ok(config.decision.threshold),
    }
}

pub fn cmd_validate(config: &PipelineConfig, a: ValidateArgs) -> Result<Output> {
    let d = load_jsonl(&a.input, a.split)?;
    let min = a.min_chars.unwrap_or(config.corpus.min_chars);
    let max = a.max_chars.unwrap_or(config.corpus.max_chars);
    let report = validate(&d, min, max);
    let counts = d.class_counts();
    let text = format!(
        "{}: {} samples ({} Yes, {} No, {} unlabeled); {} outside [{min}, {max}] chars, {} missing labels, {} duplicate texts\n",
        a.input.display(),
        report.total,
        counts.positive,
        counts.negative,
        counts.unlabeled,
        report.length_violations.len(),
        report.label_violations.len(),
        report.duplicate_texts
    );
    Ok(Output {
        summary: json!({ "report": report, "counts": counts }),
        text,
    })
}

pub fn cmd_split(config: &PipelineConfig, a: SplitArgs) -> Result<Output> {
    let input = required(a.input, &config.corpus.train, "input")?;
    let d = load_jsonl(&input, Split::Train)?;
    let per_class = a.per_class.unwrap_or(config.corpus.holdout_per_class);
    let seed = a.seed.unwrap_or(config.corpus.split_seed);
    let (train, holdout) = stratified_holdout(&d, per_class, seed)?;
    write_jsonl(&train, &a.train_out)?;
    write_jsonl(&holdout, &a.holdout_out)?;
    let (tc, hc) = (train.class_counts(), holdout.class_counts());
    Ok(Output {
        summary: json!({ "train": tc, "holdout": hc, "per_class": per_class, "seed": seed }),
        text: format!(
            "train: {} Yes / {} No -> {}\nholdout: {} Yes / {} No -> {}\n",
            tc.positive,
            tc.negative,
            a.train_out.display(),
            hc.positive,
            hc.negative,
            a.holdout_out.display()
        ),
    })
}

pub fn cmd_augment(config: &PipelineConfig, a: AugmentArgs) -> Result<Output> {
    let input = required(a.input, &config.corpus.train, "in")?;
    let mut cfg = config.augment.clone();
    if let Some(f) = a.fraction {
        cfg.fraction = f;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.homoglyph_rate {
        cfg.homoglyph_rate = r;
    }
    if let Some(ts) = a.techniques {
        cfg.techniques = ts.iter().map(|t| t.trim().parse::<Technique>()).collect::<Result<_>>()?;
    }
    let train = load_jsonl(&input, Split::Train)?;
    let out = build_augmented_trainset(&train, &cfg)?;
    write_jsonl(&out.dataset, &a.out)?;

    let s = &out.summary;
    let mut text = format!("originals: {}\n", s.originals);
    for t in &s.techniques {
        text.push_str(&format!(
            "{:>10}: {} copies, {} sampled, {} kept after dedup\n",
            t.technique.name(),
            t.copies,
            t.sampled,
            t.kept
        ));
    }
    text.push_str(&format!(
        "dedup removed {} ({} conflicts); output {} Yes / {} No -> {}\n",
        s.dedup.removed,
        s.dedup.conflicts.len(),
        s.output.positive,
        s.output.negative,
        a.out.display()
    ));
    Ok(Output {
        summary: to_value(s),
        text,
    })
}

pub fn cmd_train(config: &PipelineConfig, a: TrainArgs) -> Result<Output> {
    let train_path = required(a.train, &config.corpus.train, "train")?;
    let valid_path = required(a.valid, &config.corpus.holdout, "valid")?;
    let train = load_jsonl(&train_path, Split::Train)?;
    let valid = load_jsonl(&valid_path, Split::Holdout)?;
    let tcfg = train_config(config, &a.overrides)?;
    let mut model = Classifier::create(&backend_spec(config, &a.backend))?;
    let log = model.fit(&train, &valid, &tcfg)?;
    model.save(&a.out_model, 0)?;
    if let Some(p) = &a.out_log {
        write_json(p, &log)?;
    }
    Ok(Output {
        text: format!(
            "{} steps, selected step {} (validation macro F1 {:.4}) -> {}\n",
            log.total_steps,
            log.selected_step,
            log.best_macro_f1,
            a.out_model.display()
        ),
        summary: to_value(&log),
    })
}

fn load_pool(paths: &[PathBuf]) -> Result<Dataset> {
    let mut samples: Vec<Sample> = Vec::new();
    for p in paths {
        samples.extend(load_jsonl(p, Split::Pool)?.into_samples());
    }
    Dataset::new(Split::Pool, samples)
}

pub fn cmd_selftrain(config: &PipelineConfig, a: SelfTrainArgs) -> Result<Output> {
    let labeled_path = required(a.labeled, &config.corpus.train, "labeled")?;
    let valid_path = required(a.valid, &config.corpus.holdout, "valid")?;
    let pool_paths = if a.pool.is_empty() {
        config.corpus.pool.clone()
    } else {
        a.pool
    };
    let labeled = load_jsonl(&labeled_path, Split::Train)?;
    let valid = load_jsonl(&valid_path, Split::Holdout)?;
    let pool = load_pool(&pool_paths)?;
    let tcfg = train_config(config, &a.overrides)?;
    let mut scfg = config.selftrain.clone();
    if let Some(r) = a.rounds {
        scfg.rounds = r;
    }
    let spec = backend_spec(config, &a.backend);

    let outcome = self_train_loop(&labeled, &valid, &pool, &tcfg, &scfg, || Classifier::create(&spec))?;
    outcome.model.save(&a.out_model, scfg.rounds)?;
    if let Some(p) = &a.out_silver {
        write_silver_jsonl(&outcome.silver, p)?;
    }
    let summary = json!({
        "teacher": outcome.teacher_log,
        "rounds": outcome.rounds,
        "final_train": outcome.final_train.class_counts(),
        "silver": outcome.silver.len(),
    });
    if let Some(p) = &a.out_log {
        write_json(p, &summary)?;
    }

    let mut text = format!(
        "teacher: {} samples, validation macro F1 {:.4}\n",
        labeled.len(),
        outcome.teacher_log.best_macro_f1
    );
    for r in &outcome.rounds {
        text.push_str(&format!(
            "round {}: {} offered, silver {} Yes / {} No, train {} -> {}, validation macro F1 {:.4}\n",
            r.round,
            r.offered,
            r.silver_positive,
            r.silver_negative,
            r.merge.before,
            r.merge.after,
            r.training.best_macro_f1
        ));
    }
    text.push_str(&format!("model -> {}\n", a.out_model.display()));
    Ok(Output { summary, text })
}

fn predict_labels(model: &dyn ProbabilisticClassifier, d: &Dataset, rule: DecisionRule) -> Result<Vec<crate::corpus::Label>> {
    let texts: Vec<&str> = d.iter().map(|s| s.text.as_str()).collect();
    model
        .predict_proba_batch(&texts)?
        .into_iter()
        .map(|p| decide(p, rule))
        .collect()
}

pub fn cmd_predict(config: &PipelineConfig, a: PredictArgs) -> Result<Output> {
    let (model, _) = Classifier::load(&a.model)?;
    let rule = decision_rule(config, a.threshold)?;
    let d = load_jsonl(&a.input, Split::Test)?;
    let labels = predict_labels(&model, &d, rule)?;
    let ids: Vec<String> = d.iter().map(|s| s.id.clone()).collect();
    write_predictions(&ids, &labels, &a.out)?;
    let yes = labels.iter().filter(|l| l.is_positive()).count();
    Ok(Output {
        summary: json!({ "predictions": labels.len(), "yes": yes, "threshold": rule.threshold() }),
        text: format!(
            "{} predictions ({yes} Yes) at threshold {} -> {}\n",
            labels.len(),
            rule.threshold(),
            a.out.display()
        ),
    })
}

fn report_output(name: String, report: &EvalReport) -> Output {
    Output {
        summary: json!({ "variant": name, "report": report }),
        text: render_table(&[(name, report.macro_f1)]),
    }
}

pub fn cmd_eval(config: &PipelineConfig, a: EvalArgs) -> Result<Output> {
    let golds = load_jsonl(&a.golds, Split::Test)?;
    let rule = decision_rule(config, a.threshold)?;
    let (report, rounds) = match (&a.model, &a.predictions) {
        (Some(model_path), _) => {
            let (model, rounds) = Classifier::load(model_path)?;
            (evaluate(&model, &golds, rule)?, rounds)
        }
        (None, Some(pred_path)) => {
            let preds = read_predictions(pred_path)?;
            let (gold, pred) = align_predictions(&golds, &preds)?;
            (EvalReport::from_matrix(confusion(&gold, &pred)?, rule), 0)
        }
        (None, None) => return Err(Error::Config("eval needs --model or --predictions".into())),
    };
    if report.single_class_gold {
        log::warn!("gold labels contain a single class; macro F1 is at most 0.5");
    }
    let name = variant_name(&a.name, rounds > 0, rule);
    if let Some(p) = &a.out {
        write_json(p, &json!({ "variant": name, "report": report }))?;
    }
    Ok(report_output(name, &report))
}

pub fn cmd_sweep(a: SweepArgs) -> Result<Output> {
    let (model, _) = Classifier::load(&a.model)?;
    let valid = load_jsonl(&a.valid, Split::Holdout)?;
    let grid = a.grid.unwrap_or_else(default_grid);
    let sweep = threshold_sweep(&model, &valid, &grid)?;
    let rows: Vec<(String, f64)> = sweep
        .points
        .iter()
        .map(|r| (format!("th{}", r.threshold), r.macro_f1))
        .collect();
    let mut text = render_table(&rows);
    text.push_str(&format!("best threshold: {}\n", sweep.best_threshold));
    Ok(Output {
        summary: to_value(&sweep),
        text,
    })
}

/// Entry point shared by the binary: runs and prints the outcome.
pub fn main_with(cli: Cli) -> std::process::ExitCode {
    let json_out = cli.json;
    match run(cli) {
        Ok(out) => {
            if json_out {
                println!("{}", serde_json::to_string_pretty(&out.summary).expect("summary serializes"));
            } else {
                print!("{}", out.text);
            }
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            std::process::ExitCode::FAILURE
        }
    }
}
