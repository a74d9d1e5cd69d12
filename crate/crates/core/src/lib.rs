//! Classical hope-speech text classification.
//!
//! The crate covers the whole pipeline from raw social-media text to a
//! selected model:
//!
//! - [`corpus`]: labeled dataset loading (CSV, TSV, JSON lines), class
//!   statistics and cross-split duplicate checks.
//! - [`preprocess`]: deterministic text cleaning (URLs, placeholders,
//!   emoji, numbers, special characters, stopwords, lemmatization).
//! - [`features`]: word n-gram vocabularies with count and TF-IDF
//!   sparse vectors.
//! - [`models`]: multinomial naive Bayes, L2 logistic regression and
//!   soft-margin SVMs (linear and RBF) trained by in-crate optimizers.
//! - [`metrics`]: per-class, macro and weighted precision/recall/F1.
//! - [`harness`]: vectorizer × model grids with dev-set macro-F1 selection.
//! - [`persist`]: versioned, checksummed, byte-reproducible model bundles.
//! - [`synthetic`]: a seeded generator for keyword-separable corpora.
//!
//! Every trainer is deterministic: identical inputs in identical order give
//! bit-identical models.

pub mod corpus;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod persist;
pub mod preprocess;
pub mod synthetic;

pub use corpus::{ClassCounts, Dataset, Document, Label, Split};
pub use features::{NGramConfig, SparseMatrix, SparseVector, TfidfModel, Vocabulary};
pub use metrics::{evaluate, EvalReport};
pub use models::{KernelConfig, LinearModel, Model, NBModel, SvmModel};
pub use persist::ModelBundle;
pub use preprocess::{Cleaner, CleaningConfig};
