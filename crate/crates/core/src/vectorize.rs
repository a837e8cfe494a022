//! Tokenization, vocabulary construction, and sparse document-term matrices.
//!
//! Both modeling pipelines consume the matrices produced here. The token rule
//! is fixed: lower-cased maximal runs of letters/digits, length >= 2,
//! punctuation discarded.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Common English function words filtered from the NMF vectorization path by
/// default. The cluster pipeline's class-based weighting runs unfiltered.
pub const DEFAULT_STOP_WORDS: &[&str] = &[
    "about", "above", "after", "again", "all", "also", "an", "and", "any", "are", "as", "at",
    "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can",
    "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him", "his", "how",
    "if", "in", "into", "is", "it", "its", "itself", "just", "may", "me", "more", "most", "my",
    "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours",
    "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
    "their", "theirs", "them", "then", "there", "these", "they", "this", "those", "through",
    "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where",
    "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
];

/// Returns the default stop-word set as owned strings.
pub fn default_stop_words() -> HashSet<String> {
    DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect()
}

/// Lower-cases and splits text into maximal alphanumeric runs, keeping
/// tokens of length >= 2 (in characters).
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(|t| t.to_string())
        .collect()
}

/// An ordered term index with per-term document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Terms in lexicographic order; index = position.
    pub terms: Vec<String>,
    /// Number of documents each term appears in, aligned with `terms`.
    pub doc_freq: Vec<usize>,
    /// Corpus size the frequencies were computed over.
    pub n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Index of `term`, if retained.
    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

/// Whether matrix entries are raw counts or TF-IDF weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Counts,
    Tfidf,
}

/// IDF variant for [`tfidf_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdfMode {
    /// `ln(N / df)` — zeroes terms present in every document.
    Plain,
    /// `ln((1 + N) / (1 + df)) + 1` — weight is zero iff the count is zero.
    #[default]
    Smooth,
}

/// Sparse term-by-document matrix. Column `j` is corpus document `j`;
/// entries within a column are sorted by term index.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    n_terms: usize,
    cols: Vec<Vec<(usize, f64)>>,
    kind: MatrixKind,
}

impl DocTermMatrix {
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_docs(&self) -> usize {
        self.cols.len()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Stored entries of document `j`, sorted by term index.
    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    /// Entry `(term, doc)`; zero when not stored.
    pub fn get(&self, term: usize, doc: usize) -> f64 {
        self.cols[doc]
            .binary_search_by_key(&term, |&(t, _)| t)
            .map(|i| self.cols[doc][i].1)
            .unwrap_or(0.0)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// All stored entries as `(term, doc, value)`, column-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(d, col)| col.iter().map(move |&(t, v)| (t, d, v)))
    }

    /// Number of documents whose column stores term `t`.
    pub fn doc_freq(&self, term: usize) -> usize {
        self.cols
            .iter()
            .filter(|col| col.binary_search_by_key(&term, |&(t, _)| t).is_ok())
            .count()
    }

    /// Dense copy, `n_terms x n_docs`.
    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let mut dense = ndarray::Array2::zeros((self.n_terms, self.n_docs()));
        for (t, d, v) in self.entries() {
            dense[(t, d)] = v;
        }
        dense
    }

    /// Writes the coordinate-list debug format: a `n_terms n_docs nnz`
    /// header followed by one `term_index doc_index value` line per entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n_terms, self.n_docs(), self.nnz())?;
        for (t, d, v) in self.entries() {
            writeln!(out, "{t} {d} {v}")?;
        }
        Ok(())
    }
}

/// Builds a vocabulary over `texts`, retaining terms with
/// `min_df <= doc_freq` and `doc_freq / N <= max_df_ratio` that are not stop
/// words. Terms are sorted lexicographically.
pub fn build_vocabulary(
    texts: &[&str],
    min_df: usize,
    max_df_ratio: f64,
    stop_words: &HashSet<String>,
) -> Result<Vocabulary> {
    if min_df < 1 {
        return Err(Error::Parameter("min_df must be >= 1".into()));
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(Error::Parameter(format!(
            "max_df_ratio must be in (0, 1], got {max_df_ratio}"
        )));
    }

    let n_docs = texts.len();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for text in texts {
        let unique: HashSet<String> = tokenize(text).into_iter().collect();
        for term in unique {
            *df.entry(term).or_insert(0) += 1;
        }
    }

    let mut terms = Vec::new();
    let mut doc_freq = Vec::new();
    for (term, freq) in df {
        let ratio = freq as f64 / n_docs as f64;
        if freq >= min_df && ratio <= max_df_ratio && !stop_words.contains(&term) {
            terms.push(term);
            doc_freq.push(freq);
        }
    }

    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    Ok(Vocabulary {
        terms,
        doc_freq,
        n_docs,
    })
}

/// Counts vocabulary terms per document: entry `(t, d)` is the number of
/// occurrences of term `t` in document `d`.
pub fn count_matrix(texts: &[&str], vocab: &Vocabulary) -> DocTermMatrix {
    let cols = texts
        .iter()
        .map(|text| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for token in tokenize(text) {
                if let Some(idx) = vocab.index_of(&token) {
                    *counts.entry(idx).or_insert(0.0) += 1.0;
                }
            }
            counts.into_iter().collect()
        })
        .collect();
    DocTermMatrix {
        n_terms: vocab.len(),
        cols,
        kind: MatrixKind::Counts,
    }
}

/// Reweights a count matrix with TF-IDF.
///
/// Document frequencies are derived from the matrix itself, so the result is
/// self-consistent for any nonnegative count input.
pub fn tfidf_transform(counts: &DocTermMatrix, mode: IdfMode) -> Result<DocTermMatrix> {
    if counts.kind != MatrixKind::Counts {
        return Err(Error::Parameter(
            "tfidf_transform expects a counts matrix".into(),
        ));
    }
    let n = counts.n_docs() as f64;
    let mut df = vec![0usize; counts.n_terms()];
    for (t, _, _) in counts.entries() {
        df[t] += 1;
    }

    let idf = |t: usize| -> f64 {
        let d = df[t] as f64;
        match mode {
            IdfMode::Plain => (n / d).ln(),
            IdfMode::Smooth => ((1.0 + n) / (1.0 + d)).ln() + 1.0,
        }
    };

    let cols = counts
        .cols
        .iter()
        .map(|col| col.iter().map(|&(t, tf)| (t, tf * idf(t))).collect())
        .collect();
    Ok(DocTermMatrix {
        n_terms: counts.n_terms,
        cols,
        kind: MatrixKind::Tfidf,
    })
}
