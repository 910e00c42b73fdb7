//! Self-training binary text classification.
//!
//! The pipeline augments a small labeled train set (anonymization, case
//! variants, homoglyphs), trains a probabilistic classifier with
//! best-macro-F1 checkpoint selection, pseudo-labels an unlabeled pool,
//! keeps only very confident predictions, and retrains on the merged set.
//!
//! Any backend implementing [`model::ProbabilisticClassifier`] can be
//! plugged in: the bundled [`model::LogisticModel`] over hashed character
//! n-grams, or a [`remote::RemoteClassifier`] talking to an HTTP service.
//!
//! ```
//! use selftrain_kit::corpus::{Dataset, Label, Sample, Split};
//! use selftrain_kit::augment::{build_augmented_trainset, AugmentConfig};
//!
//! let train = Dataset::new(Split::Train, vec![
//!     Sample::labeled("a", "They are hiding the truth, ask @whistle", Label::Yes),
//!     Sample::labeled("b", "The bus timetable changed on Monday", Label::No),
//! ]).unwrap();
//! let cfg = AugmentConfig { fraction: 1.0, ..AugmentConfig::default() };
//! let out = build_augmented_trainset(&train, &cfg).unwrap();
//! assert!(out.dataset.len() > train.len());
//! ```

pub mod augment;
pub mod backend;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod remote;
pub mod selftrain;
pub mod synthetic;

mod seed;

pub use error::{Error, Result};
