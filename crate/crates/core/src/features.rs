//! Word n-gram TFIDF vectorization.
//!
//! Weights follow the smoothed-IDF convention: `idf(t) = ln((1+N)/(1+df(t))) + 1`,
//! raw (or optionally sublinear) term frequency, and L2 normalization of the
//! final vector. Feature indices are assigned in lexicographic term order so
//! a fitted vocabulary depends only on the training tokens, never on hashing
//! or thread scheduling.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::preprocess::{PreprocessConfig, TokenSequence};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    /// Minimum number of training documents a term must occur in.
    pub min_df: u32,
    /// Terms occurring in more than this fraction of training documents are dropped.
    pub max_df_ratio: f64,
    pub sublinear_tf: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            ngram_min: 1,
            ngram_max: 3,
            min_df: 2,
            max_df_ratio: 1.0,
            sublinear_tf: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_min < 1 || self.ngram_max < self.ngram_min {
            return Err(Error::InvalidConfig(format!(
                "n-gram range must satisfy 1 <= min <= max, got {}..={}",
                self.ngram_min, self.ngram_max
            )));
        }
        if self.min_df < 1 {
            return Err(Error::InvalidConfig("min_df must be at least 1".into()));
        }
        if !(self.max_df_ratio > 0.0 && self.max_df_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "max_df_ratio must lie in (0, 1], got {}",
                self.max_df_ratio
            )));
        }
        Ok(())
    }
}

/// All n-grams of `tokens` for `n` in `ngram_min..=ngram_max`, shorter n first,
/// each joined by a single space.
pub fn extract_ngrams<S: AsRef<str>>(
    tokens: &[S],
    ngram_min: usize,
    ngram_max: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    for n in ngram_min.max(1)..=ngram_max {
        for window in tokens.windows(n) {
            let mut gram = String::new();
            for (k, t) in window.iter().enumerate() {
                if k > 0 {
                    gram.push(' ');
                }
                gram.push_str(t.as_ref());
            }
            out.push(gram);
        }
    }
    out
}

/// Fitted term index with document frequencies.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    document_frequency: Vec<u32>,
    n_documents: usize,
    term_to_index: HashMap<String, u32>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.document_frequency == other.document_frequency
            && self.n_documents == other.n_documents
    }
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its stored parts, checking the ordering
    /// and frequency invariants.
    pub fn from_parts(
        terms: Vec<String>,
        document_frequency: Vec<u32>,
        n_documents: usize,
    ) -> Result<Self> {
        if terms.len() != document_frequency.len() {
            return Err(Error::LengthMismatch(format!(
                "{} terms vs {} document frequencies",
                terms.len(),
                document_frequency.len()
            )));
        }
        if terms.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig(
                "vocabulary exceeds u32 index space".into(),
            ));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "vocabulary terms must be strictly increasing".into(),
            ));
        }
        if document_frequency
            .iter()
            .any(|&df| df == 0 || df as usize > n_documents)
        {
            return Err(Error::InvalidConfig(
                "document frequencies must lie in 1..=n_documents".into(),
            ));
        }
        let term_to_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self {
            terms,
            document_frequency,
            n_documents,
            term_to_index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self) -> &[u32] {
        &self.document_frequency
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }
}

/// `ln((1 + N) / (1 + df)) + 1`
pub fn smoothed_idf(n_documents: usize, df: u32) -> f64 {
    ((1.0 + n_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    vocabulary: Vocabulary,
    idf: Vec<f64>,
    config: FeatureConfig,
    preprocess: PreprocessConfig,
}

type GramKey = SmallVec<[u32; 4]>;

impl TfidfModel {
    /// Fits the vocabulary and IDF weights on pre-tokenized training documents.
    pub fn fit(
        documents: &[TokenSequence],
        config: &FeatureConfig,
        preprocess: &PreprocessConfig,
    ) -> Result<Self> {
        config.validate()?;
        if documents.is_empty() {
            return Err(Error::NoTrainingDocuments);
        }

        // Intern tokens so n-grams can be counted as small integer keys.
        let mut token_ids: HashMap<&str, u32> = HashMap::new();
        let mut token_strs: Vec<&str> = Vec::new();
        let id_docs: Vec<Vec<u32>> = documents
            .iter()
            .map(|doc| {
                doc.as_slice()
                    .iter()
                    .map(|t| {
                        *token_ids.entry(t.as_str()).or_insert_with(|| {
                            token_strs.push(t.as_str());
                            (token_strs.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect();

        let (lo, hi) = (config.ngram_min, config.ngram_max);
        // Integer counts merge associatively, so the result does not depend
        // on how rayon partitions the documents.
        let df_counts: HashMap<GramKey, u32> = id_docs
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<GramKey, u32>, ids| {
                let mut seen: HashSet<&[u32]> = HashSet::new();
                for n in lo..=hi {
                    for window in ids.windows(n) {
                        if seen.insert(window) {
                            *acc.entry(GramKey::from_slice(window)).or_insert(0) += 1;
                        }
                    }
                }
                acc
            })
            .reduce(HashMap::new, |mut a, mut b| {
                if a.len() < b.len() {
                    std::mem::swap(&mut a, &mut b);
                }
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });

        let n_documents = documents.len();
        let max_df = config.max_df_ratio * n_documents as f64;
        let mut kept: Vec<(String, u32)> = df_counts
            .into_iter()
            .filter(|&(_, df)| df >= config.min_df && df as f64 <= max_df)
            .map(|(key, df)| {
                let term = key
                    .iter()
                    .map(|&id| token_strs[id as usize])
                    .collect::<Vec<_>>()
                    .join(" ");
                (term, df)
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary {
                min_df: config.min_df,
                max_df_ratio: config.max_df_ratio,
                n_documents,
            });
        }
        kept.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));

        let (terms, document_frequency): (Vec<String>, Vec<u32>) = kept.into_iter().unzip();
        let idf = document_frequency
            .iter()
            .map(|&df| smoothed_idf(n_documents, df))
            .collect();
        let vocabulary = Vocabulary::from_parts(terms, document_frequency, n_documents)?;
        Ok(Self {
            vocabulary,
            idf,
            config: config.clone(),
            preprocess: preprocess.clone(),
        })
    }

    /// Reassembles a fitted model, e.g. after deserialization.
    pub fn from_parts(
        vocabulary: Vocabulary,
        idf: Vec<f64>,
        config: FeatureConfig,
        preprocess: PreprocessConfig,
    ) -> Result<Self> {
        config.validate()?;
        preprocess.validate()?;
        if idf.len() != vocabulary.len() {
            return Err(Error::LengthMismatch(format!(
                "{} idf weights for {} terms",
                idf.len(),
                vocabulary.len()
            )));
        }
        if idf.iter().any(|&w| w.is_nan() || w < 1.0 || !w.is_finite()) {
            return Err(Error::InvalidConfig(
                "idf weights must be finite and >= 1".into(),
            ));
        }
        Ok(Self {
            vocabulary,
            idf,
            config,
            preprocess,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn preprocess_config(&self) -> &PreprocessConfig {
        &self.preprocess
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    /// Vectorizes one token sequence. Out-of-vocabulary n-grams are ignored;
    /// a document without any known n-gram maps to the empty vector.
    pub fn transform(&self, tokens: &TokenSequence) -> SparseVector {
        let tokens = tokens.as_slice();
        let mut hits: Vec<u32> = Vec::new();
        let mut gram = String::new();
        for n in self.config.ngram_min..=self.config.ngram_max {
            for window in tokens.windows(n) {
                gram.clear();
                for (k, t) in window.iter().enumerate() {
                    if k > 0 {
                        gram.push(' ');
                    }
                    gram.push_str(t);
                }
                if let Some(index) = self.vocabulary.index_of(&gram) {
                    hits.push(index);
                }
            }
        }
        hits.sort_unstable();

        let mut indices: Vec<u32> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut run = hits.iter().peekable();
        while let Some(&index) = run.next() {
            let mut tf = 1u32;
            while run.peek() == Some(&&index) {
                run.next();
                tf += 1;
            }
            let tf = if self.config.sublinear_tf {
                1.0 + (tf as f64).ln()
            } else {
                tf as f64
            };
            indices.push(index);
            values.push(tf * self.idf[index as usize]);
        }

        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        }
        SparseVector::from_sorted_unchecked(indices, values)
    }

    /// Cleans, tokenizes and vectorizes raw text with the fit-time settings.
    pub fn transform_text(&self, raw: &str) -> SparseVector {
        self.transform(&self.preprocess.analyze(raw))
    }
}
