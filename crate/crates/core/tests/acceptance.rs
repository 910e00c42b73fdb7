//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.
//!
//! The official-data check runs only when `SELFTRAIN_OFFICIAL_TRAIN` points to
//! the labeled train file (JSONL with id, text, label).

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use selftrain_kit::augment::{
    anonymize, build_augmented_trainset, case_variant, homoglyphify, AugmentConfig, CaseMode, ConfusablesTable,
};
use selftrain_kit::corpus::{load_jsonl, stratified_holdout, Dataset, Label, Sample, Split};
use selftrain_kit::eval::{evaluate, macro_f1, ConfusionMatrix};
use selftrain_kit::model::{
    logistic_loss_grad, select_checkpoint, DecisionRule, EvalRecord, FeatureVector, Featurizer, LogisticModel,
    TrainConfig, TrainingLog, WarmupCosine,
};
use selftrain_kit::selftrain::{filter_confident, self_train_loop, SelfTrainConfig, SilverRecord};
use selftrain_kit::synthetic::{SyntheticConfig, SyntheticCorpus};

const AUGMENT_BUDGET: Duration = Duration::from_secs(10);
const SILVER_BUDGET: Duration = Duration::from_secs(1);
const F1_BUDGET: Duration = Duration::from_secs(5);
const E2E_BUDGET: Duration = Duration::from_secs(120);

const F1_FIXTURE_TOL: f64 = 1e-12;
const RANDOM_BASELINE: f64 = 0.50;
const RANDOM_BASELINE_TOL: f64 = 0.02;
const RANDOM_BASELINE_N: usize = 10_000;

const TEACHER_MIN_F1: f64 = 0.95;
const SILVER_MIN_ACCURACY: f64 = 0.99;
const SELFTRAIN_MAX_DROP: f64 = 0.02;

const LR_TOL: f64 = 1e-9;
const GRAD_REL_TOL: f64 = 1e-5;

const OFFICIAL_ENV: &str = "SELFTRAIN_OFFICIAL_TRAIN";
const OFFICIAL_NEGATIVE: f64 = 2126.0;
const OFFICIAL_POSITIVE: f64 = 1517.0;
const OFFICIAL_TOL: f64 = 0.10;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    match result {
        Ok(detail) if elapsed <= budget => Outcome::Pass(format!("{detail}; {elapsed:.2?} <= {budget:?}")),
        Ok(detail) => Outcome::Fail(format!("{detail}; too slow: {elapsed:.2?} > {budget:?}")),
        Err(e) => Outcome::Fail(e),
    }
}

// ---------------------------------------------------------------- augmentation

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &[
        "the ", "Hidden ", "TRUTH ", "they ", "don't ", "want ", "you ", "to ", "know. ", "Straße ", "İstanbul ",
        "ǅemal ", "https://news.example.org/a?b=1 ", "www.site.net ", "mail me at jane.doe@mail.co.uk ", "@whistle ",
        "call +1 (555) 123-4567 ", "or 555.123.4567 ", "[URL] ", "[USER]", "42 ", "ЖЖ ", "😀 ", "\n",
    ];
    let n = rng.gen_range(0..40);
    (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect()
}

fn augmentation_invariants() -> Outcome {
    timed(AUGMENT_BUDGET, || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let table = ConfusablesTable::builtin();
        let inverse = table.inverted();
        let texts: Vec<String> = (0..2000).map(|_| random_text(&mut rng)).collect();
        for t in &texts {
            let a = anonymize(t);
            ensure(anonymize(&a) == a, || format!("anonymize not idempotent on {t:?}"))?;
            for mode in [CaseMode::Lower, CaseMode::Upper] {
                let c = case_variant(t, mode);
                ensure(case_variant(&c, mode) == c, || format!("{mode:?} not idempotent on {t:?}"))?;
            }
            let seed = rng.gen();
            ensure(homoglyphify(t, table, 0.0, seed) == *t, || format!("rate 0 changed {t:?}"))?;
            let partial = homoglyphify(t, table, 0.3, seed);
            ensure(partial.chars().count() == t.chars().count(), || format!("length changed on {t:?}"))?;
            let full = homoglyphify(t, table, 1.0, seed);
            ensure(full == homoglyphify(t, table, 1.0, seed ^ 0x9e37), || format!("rate 1 depends on seed for {t:?}"))?;
            ensure(full.chars().count() == t.chars().count(), || format!("length changed on {t:?}"))?;
            // Inputs contain no homoglyph targets, so both directions recover them.
            ensure(homoglyphify(&full, &inverse, 1.0, 0) == *t, || format!("inverse table did not recover {t:?}"))?;
            ensure(table.restore(&full) == *t, || format!("restore did not recover {t:?}"))?;
        }

        let corpus = SyntheticCorpus::generate(&SyntheticConfig { seed: 8, labeled: 1000, holdout: 0, pool: 0, ..SyntheticConfig::default() });
        // Inject exact duplicates and a conflict so de-duplication has work to do.
        let mut samples = corpus.labeled.samples().to_vec();
        for i in 0..20 {
            let src = samples[i].clone();
            let label = if i % 4 == 0 { flip(src.label.unwrap()) } else { src.label.unwrap() };
            samples.push(Sample::labeled(format!("dup{i}"), src.text, label));
        }
        for (i, t) in texts.iter().take(200).enumerate() {
            let label = if i % 2 == 0 { Label::Yes } else { Label::No };
            samples.push(Sample::labeled(format!("rt{i}"), t.clone(), label));
        }
        let train = Dataset::new(Split::Train, samples).map_err(|e| e.to_string())?;
        let out = build_augmented_trainset(&train, &AugmentConfig { fraction: 0.10, seed: 4, ..AugmentConfig::default() })
            .map_err(|e| e.to_string())?;
        let mut seen = HashSet::new();
        for s in &out.dataset {
            ensure(seen.insert(s.text.as_str()), || format!("duplicate text kept: {:?}", s.id))?;
            let source = s.id.split('#').next().unwrap();
            let original = train.get(source).ok_or_else(|| format!("unknown source id {source}"))?;
            ensure(s.label == original.label, || format!("label changed for {}", s.id))?;
        }
        Ok(format!(
            "{} texts checked; augmented {} -> {} samples, {} removed by dedup",
            texts.len(),
            train.len(),
            out.dataset.len(),
            out.summary.dedup.removed
        ))
    })
}

fn flip(l: Label) -> Label {
    match l {
        Label::Yes => Label::No,
        Label::No => Label::Yes,
    }
}

// --------------------------------------------------------------- silver filter

fn brute_force_silver(preds: &[(String, f64)], pos: f64, neg: f64, round: u32) -> Vec<SilverRecord> {
    let mut out = Vec::new();
    for (id, p) in preds {
        let keep_yes = *p >= pos;
        let keep_no = *p <= neg;
        if keep_yes {
            out.push(SilverRecord { id: id.clone(), p: *p, assigned: Label::Yes, round });
        } else if keep_no {
            out.push(SilverRecord { id: id.clone(), p: *p, assigned: Label::No, round });
        }
    }
    out
}

fn silver_filter_oracle() -> Outcome {
    timed(SILVER_BUDGET, || {
        let cfg = SelfTrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let specials = [0.0, 0.01, 0.99, 1.0, 0.5, 0.0100000001, 0.9899999999];
        for list in 0..1000 {
            let n = rng.gen_range(0..60);
            let preds: Vec<(String, f64)> = (0..n)
                .map(|i| {
                    let p = match rng.gen_range(0..4) {
                        0 => *specials.choose(&mut rng).unwrap(),
                        1 => rng.gen_range(0.0..0.02),
                        2 => rng.gen_range(0.98..=1.0),
                        _ => rng.gen_range(0.0..=1.0),
                    };
                    (format!("l{list}-{i}"), p)
                })
                .collect();
            let got = filter_confident(&preds, &cfg, 1).map_err(|e| e.to_string())?;
            let want = brute_force_silver(&preds, 0.99, 0.01, 1);
            ensure(got == want, || format!("list {list}: filter output differs from oracle"))?;
        }
        let edge = [("d".to_string(), 0.99), ("e".to_string(), 0.01)];
        let got = filter_confident(&edge, &cfg, 1).map_err(|e| e.to_string())?;
        ensure(
            got.len() == 2 && got[0].assigned == Label::Yes && got[1].assigned == Label::No,
            || format!("boundary cases not kept: {got:?}"),
        )?;
        Ok("1000 random lists match the oracle; p=0.99 kept as Yes, p=0.01 kept as No".into())
    })
}

// -------------------------------------------------------------------- macro F1

fn naive_macro_f1(tp: u64, fp: u64, fn_: u64, tn: u64) -> f64 {
    fn class_f1(hit: u64, false_alarm: u64, miss: u64) -> f64 {
        let precision = if hit + false_alarm == 0 { 0.0 } else { hit as f64 / (hit + false_alarm) as f64 };
        let recall = if hit + miss == 0 { 0.0 } else { hit as f64 / (hit + miss) as f64 };
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    }
    // For the No class the roles of fp and fn swap.
    (class_f1(tp, fp, fn_) + class_f1(tn, fn_, fp)) / 2.0
}

fn macro_f1_oracle() -> Outcome {
    timed(F1_BUDGET, || {
        let mut cases = 0;
        for tp in 0..=5u64 {
            for fp in 0..=5u64 {
                for fn_ in 0..=5u64 {
                    for tn in 0..=5u64 {
                        let got = macro_f1(&ConfusionMatrix { tp, fp, fn_, tn });
                        let want = naive_macro_f1(tp, fp, fn_, tn);
                        ensure(got.to_bits() == want.to_bits(), || {
                            format!("tp={tp} fp={fp} fn={fn_} tn={tn}: {got} != {want}")
                        })?;
                        cases += 1;
                    }
                }
            }
        }
        ensure(cases == 1296, || format!("{cases} cases"))?;

        let f = macro_f1(&ConfusionMatrix { tp: 3, fp: 1, fn_: 1, tn: 3 });
        ensure((f - 0.75).abs() <= F1_FIXTURE_TOL, || format!("fixture 0.75 gave {f}"))?;
        let f = macro_f1(&ConfusionMatrix { tp: 2, fp: 2, fn_: 0, tn: 0 });
        ensure((f - 1.0 / 3.0).abs() <= F1_FIXTURE_TOL, || format!("fixture 1/3 gave {f}"))?;

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cm = ConfusionMatrix::default();
        for i in 0..RANDOM_BASELINE_N {
            let gold = if i % 2 == 0 { Label::Yes } else { Label::No };
            let pred = if rng.gen_bool(0.5) { Label::Yes } else { Label::No };
            cm.record(gold, pred);
        }
        let random = macro_f1(&cm);
        ensure((random - RANDOM_BASELINE).abs() <= RANDOM_BASELINE_TOL, || {
            format!("random baseline {random:.4} outside {RANDOM_BASELINE} ± {RANDOM_BASELINE_TOL}")
        })?;
        Ok(format!("1296 matrices exact; fixtures 0.75 and 1/3; random baseline {random:.4}"))
    })
}

// ------------------------------------------------------------------ end to end

struct RunSummary {
    teacher_f1: f64,
    final_f1: f64,
    silver: usize,
    silver_correct: usize,
    fingerprint: Vec<u64>,
}

fn run_synthetic(seed: u64) -> Result<RunSummary, String> {
    let corpus = SyntheticCorpus::generate(&SyntheticConfig { seed, ..SyntheticConfig::default() });
    let tcfg = TrainConfig { seed, ..TrainConfig::default() };
    let out = self_train_loop(&corpus.labeled, &corpus.holdout, &corpus.pool, &tcfg, &SelfTrainConfig::default(), || {
        Ok(LogisticModel::default())
    })
    .map_err(|e| e.to_string())?;
    let rule = DecisionRule::default();
    let teacher_f1 = evaluate(&out.teacher, &corpus.holdout, rule).map_err(|e| e.to_string())?.macro_f1;
    let final_f1 = evaluate(&out.model, &corpus.holdout, rule).map_err(|e| e.to_string())?.macro_f1;
    let silver_correct = out.silver.iter().filter(|r| corpus.pool_truth[&r.id] == r.assigned).count();
    let texts: Vec<&str> = corpus.holdout.iter().map(|s| s.text.as_str()).collect();
    let mut fingerprint: Vec<u64> = selftrain_kit::model::ProbabilisticClassifier::predict_proba_batch(&out.model, &texts)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(f64::to_bits)
        .collect();
    fingerprint.extend(out.silver.iter().map(|r| r.p.to_bits()));
    Ok(RunSummary { teacher_f1, final_f1, silver: out.silver.len(), silver_correct, fingerprint })
}

fn end_to_end_self_training() -> Outcome {
    timed(E2E_BUDGET, || {
        let a = run_synthetic(17)?;
        let b = run_synthetic(17)?;
        ensure(a.fingerprint == b.fingerprint, || "two runs with the same seed differ".into())?;
        ensure(a.teacher_f1 >= TEACHER_MIN_F1, || format!("teacher macro F1 {:.4} < {TEACHER_MIN_F1}", a.teacher_f1))?;
        ensure(a.silver > 0, || "no silver labels produced".into())?;
        let accuracy = a.silver_correct as f64 / a.silver as f64;
        ensure(accuracy >= SILVER_MIN_ACCURACY, || format!("silver accuracy {accuracy:.4} < {SILVER_MIN_ACCURACY}"))?;
        ensure(a.final_f1 >= a.teacher_f1 - SELFTRAIN_MAX_DROP, || {
            format!("final macro F1 {:.4} < teacher {:.4} - {SELFTRAIN_MAX_DROP}", a.final_f1, a.teacher_f1)
        })?;
        Ok(format!(
            "teacher {:.4}, final {:.4}, silver {}/{} correct, deterministic",
            a.teacher_f1, a.final_f1, a.silver_correct, a.silver
        ))
    })
}

// --------------------------------------------------------------- training loop

fn analytic_lr(peak: f64, warmup: usize, total: usize, step: usize) -> f64 {
    if step < warmup {
        peak * step as f64 / warmup as f64
    } else {
        peak * 0.5 * (1.0 + (std::f64::consts::PI * (step - warmup) as f64 / (total - warmup) as f64).cos())
    }
}

fn naive_loss(weights: &[f64], bias: f64, x: &FeatureVector, y: f64) -> f64 {
    let z: f64 = x.entries().iter().map(|&(i, v)| weights[i as usize] * v).sum::<f64>() + bias;
    let p = 1.0 / (1.0 + (-z).exp());
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

fn training_loop_contract() -> Outcome {
    let run = || -> Result<String, String> {
        let mut lr_points = 0;
        for (peak, total) in [(0.1, 600usize), (0.1, 3643), (2e-4, 1000), (0.05, 10)] {
            let s = WarmupCosine::new(peak, 0.03, total);
            let warmup = (0.03 * total as f64).ceil() as usize;
            ensure(s.warmup_steps == warmup, || format!("T={total}: warmup {} != {warmup}", s.warmup_steps))?;
            for step in [0, warmup, total] {
                let want = analytic_lr(peak, warmup, total, step);
                let got = s.lr(step);
                ensure((got - want).abs() <= LR_TOL, || format!("T={total} step {step}: lr {got} != {want}"))?;
                lr_points += 1;
            }
            ensure(s.lr(0) == 0.0 && (s.lr(warmup) - peak).abs() <= LR_TOL && s.lr(total).abs() <= LR_TOL, || {
                format!("T={total}: endpoints are not 0, peak, 0")
            })?;
        }

        let records: Vec<EvalRecord> = [0.6, 0.8, 0.8]
            .iter()
            .enumerate()
            .map(|(i, &f)| EvalRecord { step: 100 * (i + 1), macro_f1: f, lr: 0.0 })
            .collect();
        let idx = select_checkpoint(&records).ok_or("no checkpoint selected")?;
        let log = TrainingLog::from_records(records.clone(), 300, 9);
        ensure(records[idx].step == 200 && log.selected_step == 200, || {
            format!("selected step {} / {}", records[idx].step, log.selected_step)
        })?;

        let f = Featurizer { dim: 1 << 14, ..Featurizer::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for (k, text) in ["they are hiding it", "Vaccines, 5G and the moon landing", "ok"].iter().enumerate() {
            let x = f.featurize(text);
            let weights: Vec<f64> = (0..f.dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let bias = rng.gen_range(-0.5..0.5);
            let y = (k % 2) as f64;
            let (_, grad, grad_bias) = logistic_loss_grad(&weights, bias, &x, y);
            let h = 1e-5;
            let (mut diff2, mut norm2) = (0.0, 0.0);
            for &(i, g) in &grad {
                let mut w = weights.clone();
                w[i as usize] += h;
                let up = naive_loss(&w, bias, &x, y);
                w[i as usize] -= 2.0 * h;
                let numeric = (up - naive_loss(&w, bias, &x, y)) / (2.0 * h);
                diff2 += (numeric - g).powi(2);
                norm2 += g * g;
            }
            let numeric_bias = (naive_loss(&weights, bias + h, &x, y) - naive_loss(&weights, bias - h, &x, y)) / (2.0 * h);
            diff2 += (numeric_bias - grad_bias).powi(2);
            norm2 += grad_bias * grad_bias;
            worst = worst.max(diff2.sqrt() / norm2.sqrt());
        }
        ensure(worst <= GRAD_REL_TOL, || format!("gradient relative error {worst:e} > {GRAD_REL_TOL:e}"))?;
        Ok(format!(
            "{lr_points} lr points within {LR_TOL:e}; checkpoint [0.6, 0.8, 0.8] -> step 200; gradient rel. error {worst:.1e}"
        ))
    };
    match run() {
        Ok(d) => Outcome::Pass(d),
        Err(e) => Outcome::Fail(e),
    }
}

// --------------------------------------------------------------- official data

fn official_counts() -> Outcome {
    let Ok(path) = std::env::var(OFFICIAL_ENV) else {
        return Outcome::Skip(format!("{OFFICIAL_ENV} not set; official train file unavailable"));
    };
    let run = || -> Result<String, String> {
        let d = load_jsonl(&path, Split::Train).map_err(|e| e.to_string())?;
        let (train, _) = stratified_holdout(&d, 100, 0).map_err(|e| e.to_string())?;
        let out = build_augmented_trainset(&train, &AugmentConfig::default()).map_err(|e| e.to_string())?;
        let counts = out.summary.output;
        let neg_dev = (counts.negative as f64 - OFFICIAL_NEGATIVE) / OFFICIAL_NEGATIVE;
        let pos_dev = (counts.positive as f64 - OFFICIAL_POSITIVE) / OFFICIAL_POSITIVE;
        let detail = format!(
            "{} neg ({:+.1}%) / {} pos ({:+.1}%); dedup removed {} ({} conflicts), source had {} samples",
            counts.negative,
            100.0 * neg_dev,
            counts.positive,
            100.0 * pos_dev,
            out.summary.dedup.removed,
            out.summary.dedup.conflicts.len(),
            d.len()
        );
        ensure(neg_dev.abs() <= OFFICIAL_TOL && pos_dev.abs() <= OFFICIAL_TOL, || detail.clone())?;
        Ok(detail)
    };
    match run() {
        Ok(d) => Outcome::Pass(d),
        Err(e) => Outcome::Fail(e),
    }
}

fn main() -> ExitCode {
    let checks: &[(&str, Check)] = &[
        ("augmentation invariants", augmentation_invariants),
        ("silver-filter oracle", silver_filter_oracle),
        ("macro-F1 oracle", macro_f1_oracle),
        ("end-to-end self-training", end_to_end_self_training),
        ("training-loop contract", training_loop_contract),
        ("official split+augment counts", official_counts),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Outcome::Pass(d) => println!("PASS  {name}: {d}"),
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
