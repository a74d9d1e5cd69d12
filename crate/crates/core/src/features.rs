//! Word n-gram features: tokenization, vocabulary fitting, and count /
//! TF-IDF sparse vectors.
//!
//! Vocabulary columns are assigned in byte-lexicographic term order, so two
//! fits over the same corpus always agree column for column. TF-IDF uses
//! the smoothed inverse document frequency
//!
//! ```text
//! idf(t) = ln((1 + N) / (1 + df(t))) + 1
//! ```
//!
//! with raw term counts as tf and an L2 normalization of every document.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("vocabulary is empty: no n-gram survives min_df over the training corpus")]
    EmptyVocabulary,
    #[error("feature index {index} out of range for dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },
    #[error("invalid n-gram config: {0}")]
    InvalidConfig(String),
    #[error("invalid sparse vector: {0}")]
    InvalidVector(String),
    #[error("vocabulary file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FeatureError {
    fn from(e: std::io::Error) -> Self {
        FeatureError::Io(e.to_string())
    }
}

/// Sorted, duplicate-free column indices with matching non-zero values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn empty() -> Self {
        SparseVector::default()
    }

    /// Checked constructor: indices strictly increasing, no zeros, equal
    /// lengths, finite values.
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self, FeatureError> {
        if indices.len() != values.len() {
            return Err(FeatureError::InvalidVector(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FeatureError::InvalidVector("indices not strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| **v == 0.0 || !v.is_finite()) {
            return Err(FeatureError::InvalidVector(format!("stored value {v} is zero or not finite")));
        }
        Ok(SparseVector { indices, values })
    }

    /// Builds from unordered `(index, value)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs<I: IntoIterator<Item = (usize, f64)>>(pairs: I) -> Self {
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector { indices, values };
        out.retain_nonzero();
        out
    }

    /// Dense slice to sparse, skipping zeros.
    pub fn from_dense(dense: &[f64]) -> Self {
        SparseVector::from_pairs(dense.iter().copied().enumerate().filter(|(_, v)| *v != 0.0))
    }

    fn retain_nonzero(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        let (indices, values) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (*i, *v))
            .unzip();
        self.indices = indices;
        self.values = values;
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    /// Smallest dimension that can hold this vector.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |i| i + 1)
    }

    pub fn check_dim(&self, dim: usize) -> Result<(), FeatureError> {
        match self.indices.last() {
            Some(&index) if index >= dim => Err(FeatureError::DimensionMismatch { index, dim }),
            _ => Ok(()),
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b, mut acc) = (0, 0, 0.0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    /// Dot product with a dense vector; indices past its end count as zero.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter()
            .filter(|(i, _)| *i < dense.len())
            .map(|(i, v)| v * dense[i])
            .sum()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim.max(self.min_dim())];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn map_values<F: FnMut(usize, f64) -> f64>(&self, mut f: F) -> SparseVector {
        let mut out = SparseVector {
            indices: self.indices.clone(),
            values: self.iter().map(|(i, v)| f(i, v)).collect(),
        };
        out.retain_nonzero();
        out
    }
}

/// Rows of sparse vectors with a fixed column count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    rows: Vec<SparseVector>,
    n_cols: usize,
}

impl SparseMatrix {
    pub fn new(rows: Vec<SparseVector>, n_cols: usize) -> Result<Self, FeatureError> {
        for row in &rows {
            row.check_dim(n_cols)?;
        }
        Ok(SparseMatrix { rows, n_cols })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        SparseMatrix {
            rows: rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
            n_cols,
        }
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Variance of all `n_rows * n_cols` entries, zeros included.
    pub fn entry_variance(&self) -> f64 {
        let count = (self.n_rows() * self.n_cols) as f64;
        if count == 0.0 {
            return 0.0;
        }
        let (sum, sum_sq) = self
            .rows
            .iter()
            .flat_map(|r| r.values.iter())
            .fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
        let mean = sum / count;
        (sum_sq / count - mean * mean).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyzer {
    #[default]
    Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NGramConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub analyzer: Analyzer,
    pub min_df: usize,
    pub max_features: Option<usize>,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            min_n: 1,
            max_n: 8,
            analyzer: Analyzer::Word,
            min_df: 1,
            max_features: None,
        }
    }
}

impl NGramConfig {
    pub fn with_range(min_n: usize, max_n: usize) -> Self {
        NGramConfig {
            min_n,
            max_n,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.min_n == 0 {
            return Err(FeatureError::InvalidConfig("min_n must be at least 1".into()));
        }
        if self.max_n < self.min_n {
            return Err(FeatureError::InvalidConfig(format!(
                "max_n ({}) < min_n ({})",
                self.max_n, self.min_n
            )));
        }
        if self.min_df == 0 {
            return Err(FeatureError::InvalidConfig("min_df must be at least 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(FeatureError::InvalidConfig("max_features must be positive".into()));
        }
        Ok(())
    }
}

/// Maximal runs of alphanumeric characters, keeping runs of two or more.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (pos, c) in text.char_indices() {
        if c.is_alphanumeric() {
            start = match start {
                Some((s, n)) => Some((s, n + 1)),
                None => Some((pos, 1)),
            };
        } else if let Some((s, n)) = start.take() {
            if n >= 2 {
                out.push(&text[s..pos]);
            }
        }
    }
    if let Some((s, n)) = start {
        if n >= 2 {
            out.push(&text[s..]);
        }
    }
    out
}

/// Contiguous n-grams for n in `[min_n, min(max_n, len)]`, joined with a
/// single space: all unigrams in position order, then all bigrams, and so on.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], config: &NGramConfig) -> Vec<String> {
    let mut out = Vec::new();
    for_each_ngram(tokens, config, |g| out.push(g.to_string()));
    out
}

fn for_each_ngram<S: AsRef<str>, F: FnMut(&str)>(tokens: &[S], config: &NGramConfig, mut f: F) {
    let upper = config.max_n.min(tokens.len());
    let mut buf = String::new();
    for n in config.min_n..=upper {
        for window in tokens.windows(n) {
            buf.clear();
            for (k, t) in window.iter().enumerate() {
                if k > 0 {
                    buf.push(' ');
                }
                buf.push_str(t.as_ref());
            }
            f(&buf);
        }
    }
}

/// Term to column map fitted on a training corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    config: NGramConfig,
}

impl Vocabulary {
    /// Fits over cleaned texts. Terms appearing in fewer than `min_df`
    /// documents are dropped; with `max_features` only the most frequent
    /// terms (by total count, ties in term order) remain.
    pub fn fit<S: AsRef<str>>(docs: &[S], config: &NGramConfig) -> Result<Self, FeatureError> {
        config.validate()?;
        // term -> (document frequency, total count, last document seen)
        let mut stats: HashMap<String, (usize, usize, usize)> = HashMap::new();
        for (doc_id, doc) in docs.iter().enumerate() {
            let tokens = tokenize(doc.as_ref());
            for_each_ngram(&tokens, config, |g| match stats.get_mut(g) {
                Some(entry) => {
                    entry.1 += 1;
                    if entry.2 != doc_id {
                        entry.0 += 1;
                        entry.2 = doc_id;
                    }
                }
                None => {
                    stats.insert(g.to_string(), (1, 1, doc_id));
                }
            });
        }

        let mut kept: Vec<(String, usize)> = stats
            .into_iter()
            .filter(|(_, (df, _, _))| *df >= config.min_df)
            .map(|(t, (_, tf, _))| (t, tf))
            .collect();
        if let Some(cap) = config.max_features {
            if kept.len() > cap {
                kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                kept.truncate(cap);
            }
        }
        if kept.is_empty() {
            return Err(FeatureError::EmptyVocabulary);
        }
        let terms = kept.into_iter().map(|(t, _)| t).collect();
        Ok(Vocabulary::from_terms(terms, config.clone()))
    }

    fn from_terms(mut terms: Vec<String>, config: NGramConfig) -> Self {
        terms.sort_unstable();
        terms.dedup();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, index, config }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    /// Occurrence counts of in-vocabulary n-grams of `tokens`.
    pub fn count_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for_each_ngram(tokens, &self.config, |g| {
            if let Some(&i) = self.index.get(g) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        });
        SparseVector::from_pairs(counts)
    }

    /// [`tokenize`] then [`Vocabulary::count_tokens`].
    pub fn count_text(&self, text: &str) -> SparseVector {
        self.count_tokens(&tokenize(text))
    }

    pub fn count_matrix<S: AsRef<str>>(&self, docs: &[S]) -> SparseMatrix {
        SparseMatrix {
            rows: docs.iter().map(|d| self.count_text(d.as_ref())).collect(),
            n_cols: self.len(),
        }
    }

    /// `# version: 1`, the n-gram settings as `# key: value` lines, then one
    /// `term<TAB>index` line per term in column order.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), FeatureError> {
        w.write_all(self.export_string().as_bytes())?;
        Ok(())
    }

    pub fn export_string(&self) -> String {
        let mut s = String::new();
        for h in Vocabulary::header_lines(&self.config) {
            let _ = writeln!(s, "{h}");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let _ = writeln!(s, "{t}\t{i}");
        }
        s
    }

    pub(crate) fn header_lines(c: &NGramConfig) -> Vec<String> {
        vec![
            "# version: 1".to_string(),
            format!("# min_n: {}", c.min_n),
            format!("# max_n: {}", c.max_n),
            format!("# min_df: {}", c.min_df),
            format!(
                "# max_features: {}",
                c.max_features.map_or("none".to_string(), |m| m.to_string())
            ),
        ]
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, FeatureError> {
        let lines: Vec<String> = r.lines().collect::<Result<_, _>>()?;
        Vocabulary::parse_lines(lines.iter().map(String::as_str))
    }

    pub(crate) fn parse_lines<'a, I: Iterator<Item = &'a str>>(lines: I) -> Result<Self, FeatureError> {
        let mut lines = lines.enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str| -> Result<String, FeatureError> {
            let (line, text) = lines.next().ok_or(FeatureError::Format {
                line: 0,
                message: format!("missing '# {key}:' header"),
            })?;
            text.strip_prefix(&format!("# {key}: "))
                .map(str::to_string)
                .ok_or(FeatureError::Format {
                    line,
                    message: format!("expected '# {key}: ...'"),
                })
        };
        let version = header("version")?;
        if version != "1" {
            return Err(FeatureError::Format {
                line: 1,
                message: format!("unsupported vocabulary version {version:?}"),
            });
        }
        let num = |s: String, line: usize| {
            s.parse::<usize>().map_err(|_| FeatureError::Format {
                line,
                message: format!("not an integer: {s:?}"),
            })
        };
        let min_n = num(header("min_n")?, 2)?;
        let max_n = num(header("max_n")?, 3)?;
        let min_df = num(header("min_df")?, 4)?;
        let max_features = match header("max_features")?.as_str() {
            "none" => None,
            other => Some(num(other.to_string(), 5)?),
        };
        let config = NGramConfig {
            min_n,
            max_n,
            analyzer: Analyzer::Word,
            min_df,
            max_features,
        };
        config.validate()?;

        let mut terms = Vec::new();
        for (line, text) in lines {
            let (term, idx) = text.split_once('\t').ok_or(FeatureError::Format {
                line,
                message: "expected term<TAB>index".into(),
            })?;
            let idx = num(idx.to_string(), line)?;
            if idx != terms.len() {
                return Err(FeatureError::Format {
                    line,
                    message: format!("index {idx} out of sequence"),
                });
            }
            if terms.last().is_some_and(|prev: &String| prev.as_str() >= term) {
                return Err(FeatureError::Format {
                    line,
                    message: "terms not in strict lexicographic order".into(),
                });
            }
            terms.push(term.to_string());
        }
        Ok(Vocabulary::from_terms(terms, config))
    }
}

/// Smoothed inverse document frequencies over a fixed vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    idf: Vec<f64>,
}

impl TfidfModel {
    /// `counts` are the training documents' count vectors.
    pub fn fit(counts: &SparseMatrix) -> Self {
        let n = counts.n_rows() as f64;
        let mut df = vec![0usize; counts.n_cols()];
        for row in counts.rows() {
            for (i, v) in row.iter() {
                if v > 0.0 {
                    df[i] += 1;
                }
            }
        }
        let idf = df
            .iter()
            .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        TfidfModel { idf }
    }

    pub fn from_idf(idf: Vec<f64>) -> Result<Self, FeatureError> {
        if let Some(v) = idf.iter().find(|v| !v.is_finite() || **v < 1.0) {
            return Err(FeatureError::InvalidVector(format!("idf value {v} below 1")));
        }
        Ok(TfidfModel { idf })
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// `tf * idf`, scaled to unit Euclidean norm; zero stays zero.
    pub fn transform(&self, counts: &SparseVector) -> Result<SparseVector, FeatureError> {
        counts.check_dim(self.idf.len())?;
        let weighted = counts.map_values(|i, v| v * self.idf[i]);
        let norm = weighted.norm_squared().sqrt();
        if norm == 0.0 {
            return Ok(SparseVector::empty());
        }
        Ok(weighted.map_values(|_, v| v / norm))
    }

    pub fn transform_matrix(&self, counts: &SparseMatrix) -> Result<SparseMatrix, FeatureError> {
        let rows = counts
            .rows()
            .iter()
            .map(|r| self.transform(r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SparseMatrix {
            rows,
            n_cols: self.idf.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorizerKind {
    Count,
    Tfidf,
}

impl VectorizerKind {
    pub const ALL: [VectorizerKind; 2] = [VectorizerKind::Count, VectorizerKind::Tfidf];

    pub fn name(self) -> &'static str {
        match self {
            VectorizerKind::Count => "count",
            VectorizerKind::Tfidf => "tfidf",
        }
    }
}

impl std::str::FromStr for VectorizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "count" | "cv" => Ok(VectorizerKind::Count),
            "tfidf" | "tf-idf" => Ok(VectorizerKind::Tfidf),
            other => Err(format!("unknown vectorizer {other:?} (expected count or tfidf)")),
        }
    }
}

impl std::fmt::Display for VectorizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A fitted vocabulary with an optional TF-IDF weighting on top.
#[derive(Debug, Clone, PartialEq)]
pub struct Vectorizer {
    pub vocabulary: Vocabulary,
    pub tfidf: Option<TfidfModel>,
}

impl Vectorizer {
    pub fn fit<S: AsRef<str>>(docs: &[S], config: &NGramConfig, kind: VectorizerKind) -> Result<Self, FeatureError> {
        let vocabulary = Vocabulary::fit(docs, config)?;
        Ok(Vectorizer::from_vocabulary(vocabulary, docs, kind))
    }

    /// Reuses an already fitted vocabulary; `docs` must be its training corpus.
    pub fn from_vocabulary<S: AsRef<str>>(vocabulary: Vocabulary, docs: &[S], kind: VectorizerKind) -> Self {
        let tfidf = match kind {
            VectorizerKind::Count => None,
            VectorizerKind::Tfidf => Some(TfidfModel::fit(&vocabulary.count_matrix(docs))),
        };
        Vectorizer { vocabulary, tfidf }
    }

    pub fn kind(&self) -> VectorizerKind {
        if self.tfidf.is_some() {
            VectorizerKind::Tfidf
        } else {
            VectorizerKind::Count
        }
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        let counts = self.vocabulary.count_text(text);
        match &self.tfidf {
            None => counts,
            Some(model) => model
                .transform(&counts)
                .expect("counts are indexed by the same vocabulary"),
        }
    }

    pub fn transform_all<S: AsRef<str>>(&self, docs: &[S]) -> SparseMatrix {
        SparseMatrix {
            rows: docs.iter().map(|d| self.transform(d.as_ref())).collect(),
            n_cols: self.dim(),
        }
    }
}
