//! Train/dev/test experiment workflow.
//!
//! [`run_grid`] fits every (vectorizer, model) pair on the training split,
//! scores it on dev, and returns the cells ranked by dev macro-F1. Cleaning,
//! vocabulary and idf are fitted once on train and shared by every cell;
//! dev and test text is only ever transformed. [`run_experiment`] adds
//! dataset loading, test evaluation of the selected cell and predictions.
//!
//! Everything written by [`write_artifacts`] is a pure function of the
//! config and the data, except `timings.tsv`.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{check_split_integrity, load_dataset, Collision, CorpusError, Dataset, Format, Label, Schema, Split};
use crate::features::{FeatureError, NGramConfig, SparseMatrix, Vectorizer, VectorizerKind, Vocabulary};
use crate::metrics::{evaluate, format_report, EvalReport, MetricsError, ReportStyle};
use crate::models::{train_model, Hyperparameters, ModelError, ModelKind};
use crate::persist::{ModelBundle, PersistError};
use crate::preprocess::{Cleaner, CleaningConfig, PreprocessError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("the experiment grid is empty (need at least one vectorizer and one model)")]
    EmptyGrid,
    #[error("the leaderboard is empty")]
    EmptyLeaderboard,
    #[error("every grid cell failed to train")]
    NoSuccessfulRow,
}

impl HarnessError {
    /// Failures of fitting rather than of reading inputs.
    pub fn is_training_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Model(_) | HarnessError::Feature(_) | HarnessError::NoSuccessfulRow
        )
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Which cells to run and how to fit them.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub cleaning: CleaningConfig,
    pub ngram: NGramConfig,
    pub vectorizers: Vec<VectorizerKind>,
    pub models: Vec<ModelKind>,
    pub hyperparameters: Hyperparameters,
    /// Worker threads for grid cells; 1 runs them in order on the caller.
    pub jobs: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            cleaning: CleaningConfig::default(),
            ngram: NGramConfig::default(),
            vectorizers: VectorizerKind::ALL.to_vec(),
            models: ModelKind::ALL.to_vec(),
            hyperparameters: Hyperparameters::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderboardRow {
    pub model: ModelKind,
    pub vectorizer: VectorizerKind,
    pub dev: Option<EvalReport>,
    pub test: Option<EvalReport>,
    /// Training failure for this cell; `dev` is `None` when set.
    pub error: Option<String>,
    pub train_time: Duration,
}

impl LeaderboardRow {
    pub fn dev_macro_f1(&self) -> Option<f64> {
        self.dev.as_ref().map(EvalReport::macro_f1)
    }

    pub fn key(&self) -> (&'static str, &'static str) {
        (self.model.name(), self.vectorizer.name())
    }
}

/// Leaderboard order: scored rows by dev macro-F1 descending, then failed
/// rows; ties by (model, vectorizer) name.
pub fn leaderboard_order(a: &LeaderboardRow, b: &LeaderboardRow) -> Ordering {
    let by_score = match (a.dev_macro_f1(), b.dev_macro_f1()) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_score.then_with(|| a.key().cmp(&b.key()))
}

/// A ranked grid cell with the fitted pipeline when training succeeded.
#[derive(Debug, Clone)]
pub struct Cell {
    pub row: LeaderboardRow,
    pub bundle: Option<ModelBundle>,
}

/// The highest-ranked scored row.
pub fn select_best(rows: &[LeaderboardRow]) -> Result<&LeaderboardRow> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyLeaderboard);
    }
    rows.iter()
        .filter(|r| r.dev.is_some())
        .min_by(|a, b| leaderboard_order(a, b))
        .ok_or(HarnessError::NoSuccessfulRow)
}

fn dedup<T: Ord + Copy>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v.dedup();
    v
}

struct Prepared {
    cleaning: CleaningConfig,
    vectorizer: Vectorizer,
    x_train: SparseMatrix,
    x_dev: SparseMatrix,
}

/// Runs the grid. Vocabulary and idf are fitted on `train` only. A model
/// that fails to train yields an error row; the other cells continue.
pub fn run_grid(spec: &GridSpec, train: &Dataset, dev: &Dataset) -> Result<Vec<Cell>> {
    let vectorizers = dedup(&spec.vectorizers);
    let models = dedup(&spec.models);
    if vectorizers.is_empty() || models.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let cleaner = Cleaner::new(spec.cleaning.clone())?;
    let y_train = train.labels()?;
    let y_dev = dev.labels()?;
    let train_clean = cleaner.clean_all(train.texts());
    let dev_clean = cleaner.clean_all(dev.texts());
    let vocabulary = Vocabulary::fit(&train_clean, &spec.ngram)?;

    let prepared: Vec<Prepared> = vectorizers
        .iter()
        .map(|&kind| {
            let vectorizer = Vectorizer::from_vocabulary(vocabulary.clone(), &train_clean, kind);
            Prepared {
                cleaning: spec.cleaning.clone(),
                x_train: vectorizer.transform_all(&train_clean),
                x_dev: vectorizer.transform_all(&dev_clean),
                vectorizer,
            }
        })
        .collect();

    let jobs: Vec<(&Prepared, ModelKind)> = prepared
        .iter()
        .flat_map(|p| models.iter().map(move |&m| (p, m)))
        .collect();
    let run = |&(p, m): &(&Prepared, ModelKind)| run_cell(p, m, &spec.hyperparameters, &y_train, &y_dev);

    let mut cells: Vec<Cell> = if spec.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    } else {
        jobs.iter().map(run).collect()
    };
    cells.sort_by(|a, b| leaderboard_order(&a.row, &b.row));
    Ok(cells)
}

fn run_cell(p: &Prepared, kind: ModelKind, hyper: &Hyperparameters, y_train: &[Label], y_dev: &[Label]) -> Cell {
    let start = Instant::now();
    let trained = train_model(kind, &p.x_train, y_train, hyper);
    let train_time = start.elapsed();
    let mut row = LeaderboardRow {
        model: kind,
        vectorizer: p.vectorizer.kind(),
        dev: None,
        test: None,
        error: None,
        train_time,
    };
    let outcome = trained.map_err(HarnessError::from).and_then(|model| {
        let predicted = p
            .x_dev
            .rows()
            .iter()
            .map(|x| model.predict(x))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let report = evaluate(y_dev, &predicted)?;
        let bundle = ModelBundle::new(p.cleaning.clone(), p.vectorizer.clone(), model)?;
        Ok((report, bundle))
    });
    match outcome {
        Ok((report, bundle)) => {
            row.dev = Some(report);
            Cell {
                row,
                bundle: Some(bundle),
            }
        }
        Err(e) => {
            row.error = Some(single_line(&e.to_string()));
            Cell { row, bundle: None }
        }
    }
}

fn single_line(s: &str) -> String {
    s.replace(['\n', '\r', '\t'], " ")
}

/// Fits one cleaning + vectorizer + model pipeline on `train`.
pub fn train_pipeline(
    cleaning: &CleaningConfig,
    ngram: &NGramConfig,
    vectorizer: VectorizerKind,
    model: ModelKind,
    hyper: &Hyperparameters,
    train: &Dataset,
) -> Result<ModelBundle> {
    let cleaner = Cleaner::new(cleaning.clone())?;
    let y = train.labels()?;
    let texts = cleaner.clean_all(train.texts());
    let vectorizer = Vectorizer::fit(&texts, ngram, vectorizer)?;
    let x = vectorizer.transform_all(&texts);
    let model = train_model(model, &x, &y, hyper)?;
    Ok(ModelBundle::new(cleaning.clone(), vectorizer, model)?)
}

pub fn predict_dataset(bundle: &ModelBundle, dataset: &Dataset) -> Result<Vec<Label>> {
    bundle.predict_texts(dataset.texts())
}

pub fn evaluate_bundle(bundle: &ModelBundle, dataset: &Dataset) -> Result<EvalReport> {
    let gold = dataset.labels()?;
    let predicted = predict_dataset(bundle, dataset)?;
    Ok(evaluate(&gold, &predicted)?)
}

pub const PREDICTIONS_HEADER: &str = "id\tlabel";

/// Writes an `id<TAB>label` header and one line per document in input
/// order. Returns the number of prediction lines.
pub fn predict_file<W: Write>(bundle: &ModelBundle, dataset: &Dataset, mut writer: W) -> Result<usize> {
    let labels = predict_dataset(bundle, dataset)?;
    writeln!(writer, "{PREDICTIONS_HEADER}")?;
    for (doc, label) in dataset.documents.iter().zip(&labels) {
        writeln!(writer, "{}\t{}", single_line(&doc.id), label.as_str())?;
    }
    writer.flush()?;
    Ok(labels.len())
}

/// Cleaning, n-gram and model settings for single-pipeline commands. Any
/// other keys (an experiment config, say) are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub cleaning: CleaningConfig,
    pub ngram: NGramConfig,
    pub hyperparameters: Hyperparameters,
}

impl PipelineConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {}", path.display(), single_line(&e.to_string()))))
        }
    }
}

fn default_vectorizers() -> Vec<VectorizerKind> {
    VectorizerKind::ALL.to_vec()
}

fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

fn default_jobs() -> usize {
    1
}

/// Experiment description, read from TOML or JSON. Relative dataset paths
/// are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub train: PathBuf,
    pub dev: PathBuf,
    #[serde(default)]
    pub test: Option<PathBuf>,
    /// Inferred from each file's extension when absent.
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub schema: Schema,
    #[serde(default)]
    pub cleaning: CleaningConfig,
    #[serde(default)]
    pub ngram: NGramConfig,
    #[serde(default = "default_vectorizers")]
    pub vectorizers: Vec<VectorizerKind>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    /// Recorded in the outputs; no pipeline stage is random.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(train: PathBuf, dev: PathBuf, test: Option<PathBuf>) -> Self {
        ExperimentConfig {
            train,
            dev,
            test,
            format: None,
            schema: Schema::default(),
            cleaning: CleaningConfig::default(),
            ngram: NGramConfig::default(),
            vectorizers: default_vectorizers(),
            models: default_models(),
            hyperparameters: Hyperparameters::default(),
            seed: 0,
            jobs: 1,
        }
    }

    /// `.json` files are JSON, anything else TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut config: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {}", path.display(), single_line(&e.to_string()))))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.train);
        resolve(&mut config.dev);
        if let Some(t) = config.test.as_mut() {
            resolve(t);
        }
        Ok(config)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            cleaning: self.cleaning.clone(),
            ngram: self.ngram.clone(),
            vectorizers: self.vectorizers.clone(),
            models: self.models.clone(),
            hyperparameters: self.hyperparameters.clone(),
            jobs: self.jobs.max(1),
        }
    }

    fn format_for(&self, path: &Path) -> Format {
        self.format.unwrap_or_else(|| Format::from_path(path))
    }

    pub fn load_splits(&self) -> Result<(Dataset, Dataset, Option<Dataset>)> {
        let train = load_dataset(&self.train, self.format_for(&self.train), &self.schema, Split::Train)?;
        let dev = load_dataset(&self.dev, self.format_for(&self.dev), &self.schema, Split::Dev)?;
        let test = match &self.test {
            Some(p) => Some(load_dataset(p, self.format_for(p), &self.schema, Split::Test)?),
            None => None,
        };
        Ok((train, dev, test))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Ranked; the selected cell's row carries the test report.
    pub cells: Vec<Cell>,
    pub best: usize,
    pub predictions: Option<String>,
    pub collisions: Vec<Collision>,
    pub seed: u64,
}

impl ExperimentOutcome {
    pub fn rows(&self) -> Vec<LeaderboardRow> {
        self.cells.iter().map(|c| c.row.clone()).collect()
    }

    pub fn best_row(&self) -> &LeaderboardRow {
        &self.cells[self.best].row
    }

    pub fn best_bundle(&self) -> &ModelBundle {
        self.cells[self.best]
            .bundle
            .as_ref()
            .expect("the selected cell trained successfully")
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let (train, dev, test) = config.load_splits()?;
    run_experiment_on(&config.grid(), config.seed, &train, &dev, test.as_ref())
}

/// [`run_experiment`] over datasets already in memory.
pub fn run_experiment_on(
    spec: &GridSpec,
    seed: u64,
    train: &Dataset,
    dev: &Dataset,
    test: Option<&Dataset>,
) -> Result<ExperimentOutcome> {
    let empty = Dataset::new(Split::Test, Vec::new());
    let collisions = check_split_integrity(train, dev, test.unwrap_or(&empty));
    let mut cells = run_grid(spec, train, dev)?;
    let best_key = select_best(&cells.iter().map(|c| c.row.clone()).collect::<Vec<_>>())?.key();
    let best = cells
        .iter()
        .position(|c| c.row.key() == best_key)
        .expect("best row comes from these cells");

    let mut predictions = None;
    if let Some(test) = test {
        let bundle = cells[best].bundle.as_ref().expect("scored rows have bundles");
        let mut buf = Vec::new();
        predict_file(bundle, test, &mut buf)?;
        if test.is_labeled() && !test.is_empty() {
            let report = evaluate_bundle(bundle, test)?;
            cells[best].row.test = Some(report);
        }
        predictions = Some(String::from_utf8(buf).expect("predictions are UTF-8"));
    }
    Ok(ExperimentOutcome {
        cells,
        best,
        predictions,
        collisions,
        seed,
    })
}

fn two(v: f64) -> String {
    format!("{v:.2}")
}

/// Human leaderboard: one tab-separated line per row, ranked.
pub fn format_leaderboard_table(rows: &[LeaderboardRow]) -> String {
    let mut s = String::from(
        "Rank\tModel\tVectorizer\tMacro Precision\tMacro Recall\tMacro F1\tAcc\tTest Macro F1\n",
    );
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(s, "{}\t{}\t{}", i + 1, r.model, r.vectorizer);
        match (&r.dev, &r.error) {
            (Some(d), _) => {
                let test = r.test.as_ref().map_or("-".to_string(), |t| two(t.macro_f1()));
                let _ = writeln!(
                    s,
                    "\t{}\t{}\t{}\t{}\t{test}",
                    two(d.macro_avg.precision),
                    two(d.macro_avg.recall),
                    two(d.macro_avg.f1),
                    two(d.accuracy)
                );
            }
            (None, e) => {
                let _ = writeln!(s, "\tfailed: {}", e.as_deref().unwrap_or("unknown error"));
            }
        }
    }
    s
}

/// Machine leaderboard: `key<TAB>value` lines, reals at full precision.
pub fn format_leaderboard_machine(rows: &[LeaderboardRow], seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed\t{seed}");
    let _ = writeln!(s, "selection\tdev.macro.f1");
    let _ = writeln!(s, "rows\t{}", rows.len());
    if let Ok(best) = select_best(rows) {
        let _ = writeln!(s, "best.model\t{}", best.model);
        let _ = writeln!(s, "best.vectorizer\t{}", best.vectorizer);
    }
    for (i, r) in rows.iter().enumerate() {
        let p = format!("row.{}", i + 1);
        let _ = writeln!(s, "{p}.model\t{}", r.model);
        let _ = writeln!(s, "{p}.vectorizer\t{}", r.vectorizer);
        match &r.error {
            Some(e) => {
                let _ = writeln!(s, "{p}.status\terror");
                let _ = writeln!(s, "{p}.error\t{e}");
            }
            None => {
                let _ = writeln!(s, "{p}.status\tok");
            }
        }
        for (split, report) in [("dev", &r.dev), ("test", &r.test)] {
            if let Some(report) = report {
                for line in format_report(report, ReportStyle::Machine).lines() {
                    let _ = writeln!(s, "{p}.{split}.{line}");
                }
            }
        }
    }
    s
}

fn format_timings(rows: &[LeaderboardRow]) -> String {
    let mut s = String::from("model\tvectorizer\ttrain_seconds\n");
    for r in rows {
        let _ = writeln!(s, "{}\t{}\t{:.6}", r.model, r.vectorizer, r.train_time.as_secs_f64());
    }
    s
}

pub const LEADERBOARD_TABLE: &str = "leaderboard.txt";
pub const LEADERBOARD_MACHINE: &str = "leaderboard.tsv";
pub const TIMINGS: &str = "timings.tsv";
pub const BEST_BUNDLE: &str = "best.bundle";
pub const TEST_REPORT: &str = "test_report.txt";
pub const TEST_REPORT_MACHINE: &str = "test_report.tsv";
pub const PREDICTIONS: &str = "predictions.tsv";

/// Writes the leaderboards, timings, selected bundle, test report and
/// predictions into `dir` (created if missing). Returns the paths written.
pub fn write_artifacts(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let rows = outcome.rows();
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    put(LEADERBOARD_TABLE, format_leaderboard_table(&rows).as_bytes())?;
    put(LEADERBOARD_MACHINE, format_leaderboard_machine(&rows, outcome.seed).as_bytes())?;
    put(TIMINGS, format_timings(&rows).as_bytes())?;
    put(BEST_BUNDLE, &outcome.best_bundle().to_bytes()?)?;
    if let Some(report) = &outcome.best_row().test {
        put(TEST_REPORT, format_report(report, ReportStyle::Table).as_bytes())?;
        put(TEST_REPORT_MACHINE, format_report(report, ReportStyle::Machine).as_bytes())?;
    }
    if let Some(p) = &outcome.predictions {
        put(PREDICTIONS, p.as_bytes())?;
    }
    Ok(written)
}
