//! Homoglyph substitution with an injective confusables table.

use std::collections::HashMap;
use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const BUILTIN_TSV: &str = include_str!("../../resources/confusables.tsv");

static BUILTIN: LazyLock<ConfusablesTable> =
    LazyLock::new(|| ConfusablesTable::from_tsv(BUILTIN_TSV).expect("bundled confusables table is valid"));

/// Injective mapping from a source character to a look-alike from another
/// script, together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusablesTable {
    forward: HashMap<char, char>,
    inverse: HashMap<char, char>,
}

impl ConfusablesTable {
    /// The bundled Latin to Cyrillic/Greek table.
    pub fn builtin() -> &'static ConfusablesTable {
        &BUILTIN
    }

    /// Parses `source<TAB>target[<TAB>comment]` lines. `#` starts a comment line.
    pub fn from_tsv(tsv: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in tsv.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let src = single_char(cols.next(), idx + 1)?;
            let dst = single_char(cols.next(), idx + 1)?;
            pairs.push((src, dst));
        }
        Self::from_pairs(pairs)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self> {
        let mut forward = HashMap::new();
        let mut inverse = HashMap::new();
        for (src, dst) in pairs {
            if src == dst {
                return Err(Error::Domain(format!("confusable maps {src:?} to itself")));
            }
            if forward.insert(src, dst).is_some() {
                return Err(Error::Domain(format!("confusable source {src:?} mapped twice")));
            }
            if inverse.insert(dst, src).is_some() {
                return Err(Error::Domain(format!(
                    "confusable target {dst:?} used twice, table is not injective"
                )));
            }
        }
        Ok(ConfusablesTable { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn get(&self, c: char) -> Option<char> {
        self.forward.get(&c).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.forward.iter().map(|(&s, &t)| (s, t))
    }

    /// The reversed table.
    pub fn inverted(&self) -> ConfusablesTable {
        ConfusablesTable {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Maps every homoglyph back to its source character.
    pub fn restore(&self, text: &str) -> String {
        text.chars()
            .map(|c| self.inverse.get(&c).copied().unwrap_or(c))
            .collect()
    }
}

fn single_char(col: Option<&str>, line: usize) -> Result<char> {
    let col = col.ok_or_else(|| Error::Domain(format!("confusables line {line}: missing column")))?;
    let mut chars = col.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Domain(format!(
            "confusables line {line}: expected one character, got {col:?}"
        ))),
    }
}

/// Replaces each mapped character independently with probability `rate`.
///
/// `rate >= 1.0` replaces every mapped character without consuming the
/// generator, so the result does not depend on `seed`. Character count is
/// always preserved.
pub fn homoglyphify(text: &str, table: &ConfusablesTable, rate: f64, seed: u64) -> String {
    if rate <= 0.0 {
        return text.to_string();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    text.chars()
        .map(|c| match table.get(c) {
            Some(g) if rate >= 1.0 || rng.gen::<f64>() < rate => g,
            _ => c,
        })
        .collect()
}
