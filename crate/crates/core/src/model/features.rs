use serde::{Deserialize, Serialize};

use crate::seed::text_seed;

/// 2^18 hashed feature slots.
pub const DEFAULT_DIM: usize = 1 << 18;
/// Character n-gram orders, inclusive.
pub const DEFAULT_NGRAM_RANGE: (usize, usize) = (1, 4);

/// Sparse, L2-normalized feature vector sorted by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| weights[i as usize] * v).sum()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }
}

/// Hashed character n-gram featurizer.
///
/// Every n-gram (as a run of Unicode scalar values) is hashed with 64-bit
/// FNV-1a over its UTF-8 bytes and reduced modulo `dim`. Counts are
/// accumulated and the vector is L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Featurizer {
    pub dim: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
}

impl Default for Featurizer {
    fn default() -> Self {
        Featurizer {
            dim: DEFAULT_DIM,
            ngram_min: DEFAULT_NGRAM_RANGE.0,
            ngram_max: DEFAULT_NGRAM_RANGE.1,
        }
    }
}

impl Featurizer {
    pub fn bucket(&self, ngram: &str) -> u32 {
        (text_seed(ngram) % self.dim as u64) as u32
    }

    pub fn featurize(&self, text: &str) -> FeatureVector {
        // Byte offsets of every char boundary, so n-grams are zero-copy slices.
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(text.len()))
            .collect();
        let n_chars = bounds.len() - 1;

        let mut buckets = Vec::new();
        for n in self.ngram_min..=self.ngram_max {
            if n == 0 || n > n_chars {
                continue;
            }
            for start in 0..=n_chars - n {
                buckets.push(self.bucket(&text[bounds[start]..bounds[start + n]]));
            }
        }
        buckets.sort_unstable();

        let mut entries: Vec<(u32, f64)> = Vec::new();
        for b in buckets {
            match entries.last_mut() {
                Some((last, count)) if *last == b => *count += 1.0,
                _ => entries.push((b, 1.0)),
            }
        }
        let norm = entries.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
        for (_, v) in &mut entries {
            *v /= norm;
        }
        FeatureVector { entries }
    }
}

/// [`Featurizer::featurize`] with the default 2^18 slots and 1..=4 grams.
pub fn featurize(text: &str) -> FeatureVector {
    Featurizer::default().featurize(text)
}
