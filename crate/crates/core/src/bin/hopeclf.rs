//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 training error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hopeclf::corpus::{self, load_dataset, write_dataset, Dataset, Format, Schema, Split};
use hopeclf::features::VectorizerKind;
use hopeclf::harness::{self, ExperimentConfig, HarnessError, PipelineConfig};
use hopeclf::metrics::{format_report, ReportStyle};
use hopeclf::models::ModelKind;
use hopeclf::persist::ModelBundle;
use hopeclf::preprocess::Cleaner;

#[derive(Parser)]
#[command(name = "hopeclf", version, about = "Hope-speech text classification", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print per-class document counts.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// Which split the file is; test files may be unlabeled.
        #[arg(long, default_value = "train", value_parser = parse_split)]
        split: Split,
    },
    /// Write a copy of the dataset with cleaned text.
    Clean {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        output: PathBuf,
        /// TOML or JSON file with a [cleaning] table.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit one (vectorizer, model) pipeline and save it as a bundle.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long, value_parser = parse_vectorizer)]
        vectorizer: VectorizerKind,
        /// Bundle path to write.
        #[arg(long)]
        output: PathBuf,
        /// TOML or JSON with [cleaning], [ngram] and [hyperparameters] tables.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Accepted for reproducibility records; training is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a bundle on a labeled file.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        bundle: PathBuf,
        /// Print key<TAB>value records instead of the table.
        #[arg(long)]
        machine: bool,
    },
    /// Write id<TAB>label predictions for every document.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        bundle: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Refuse the bundle unless its cleaning and n-gram settings match.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the vectorizer x model grid and write leaderboard artifacts.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    /// csv, tsv or jsonl; inferred from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[command(flatten)]
    columns: ColumnArgs,
}

#[derive(Args)]
struct ColumnArgs {
    #[arg(long, default_value = "text")]
    text_column: String,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Use "" for files without ids.
    #[arg(long, default_value = "id")]
    id_column: String,
}

impl ColumnArgs {
    fn schema(&self) -> Schema {
        Schema {
            text_column: self.text_column.clone(),
            label_column: Some(self.label_column.clone()).filter(|s| !s.is_empty()),
            id_column: Some(self.id_column.clone()).filter(|s| !s.is_empty()),
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment file; command-line dataset flags override its paths.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training split.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Restrict the grid to one model.
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    /// Restrict the grid to one vectorizer.
    #[arg(long, value_parser = parse_vectorizer)]
    vectorizer: Option<VectorizerKind>,
    /// Artifact directory.
    #[arg(long, default_value = "experiment-out")]
    output: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: corpus::CorpusError| e.to_string())
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn parse_vectorizer(s: &str) -> Result<VectorizerKind, String> {
    s.parse()
}

fn parse_split(s: &str) -> Result<Split, String> {
    match s {
        "train" => Ok(Split::Train),
        "dev" => Ok(Split::Dev),
        "test" => Ok(Split::Test),
        other => Err(format!("unknown split {other:?} (expected train, dev or test)")),
    }
}

enum Failure {
    Usage(String),
    Data(String),
    Training(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_training_error() {
            Failure::Training(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<corpus::CorpusError> for Failure {
    fn from(e: corpus::CorpusError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<hopeclf::persist::PersistError> for Failure {
    fn from(e: hopeclf::persist::PersistError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn load(data: &DataArgs, split: Split) -> Result<Dataset, Failure> {
    let format = data.format.unwrap_or_else(|| Format::from_path(&data.input));
    load_dataset(&data.input, format, &data.columns.schema(), split)
        .map_err(|e| Failure::Data(format!("{}: {e}", data.input.display())))
}

fn pipeline_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    match path {
        Some(p) => Ok(PipelineConfig::from_path(p)?),
        None => Ok(PipelineConfig::default()),
    }
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Stats { data, split } => {
            let ds = load(&data, split)?;
            let counts = corpus::stats(&ds)?;
            println!("{counts}");
            if !ds.empty_rows.is_empty() {
                eprintln!("warning: {} rows with empty text", ds.empty_rows.len());
            }
        }
        Command::Clean { data, output, config } => {
            let cfg = pipeline_config(config.as_deref())?;
            let mut ds = load(&data, Split::Test)?;
            let cleaner = Cleaner::new(cfg.cleaning).map_err(|e| Failure::Data(e.to_string()))?;
            for doc in &mut ds.documents {
                doc.text = cleaner.clean(&doc.text);
            }
            let format = data.format.unwrap_or_else(|| Format::from_path(&output));
            let file = BufWriter::new(File::create(&output)?);
            write_dataset(&ds, file, format, &data.columns.schema())?;
        }
        Command::Train {
            data,
            model,
            vectorizer,
            output,
            config,
            seed: _,
        } => {
            let cfg = pipeline_config(config.as_deref())?;
            let ds = load(&data, Split::Train)?;
            let bundle = harness::train_pipeline(&cfg.cleaning, &cfg.ngram, vectorizer, model, &cfg.hyperparameters, &ds)?;
            bundle.save(&output)?;
            eprintln!(
                "trained {model} + {vectorizer} on {} documents, {} features, checksum {}",
                ds.len(),
                bundle.vocabulary().len(),
                bundle.checksum()
            );
        }
        Command::Eval { data, bundle, machine } => {
            let bundle = ModelBundle::load(&bundle)?;
            let ds = load(&data, Split::Dev)?;
            let report = harness::evaluate_bundle(&bundle, &ds)?;
            let style = if machine { ReportStyle::Machine } else { ReportStyle::Table };
            print!("{}", format_report(&report, style));
        }
        Command::Predict {
            data,
            bundle,
            output,
            config,
        } => {
            let bundle = ModelBundle::load(&bundle)?;
            if let Some(path) = config.as_deref() {
                let cfg = pipeline_config(Some(path))?;
                bundle.ensure_compatible(&cfg.cleaning, &cfg.ngram)?;
            }
            let ds = load(&data, Split::Test)?;
            harness::predict_file(&bundle, &ds, output_writer(output.as_deref())?)?;
        }
        Command::Experiment(args) => experiment(args)?,
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let mut config = match (&args.config, &args.input, &args.dev) {
        (Some(path), _, _) => ExperimentConfig::from_path(path)?,
        (None, Some(train), Some(dev)) => ExperimentConfig::new(train.clone(), dev.clone(), None),
        _ => {
            return Err(Failure::Usage(
                "experiment needs --config, or both --input and --dev".into(),
            ))
        }
    };
    if let Some(p) = args.input {
        config.train = p;
    }
    if let Some(p) = args.dev {
        config.dev = p;
    }
    if args.test.is_some() {
        config.test = args.test;
    }
    if args.format.is_some() {
        config.format = args.format;
    }
    if let Some(m) = args.model {
        config.models = vec![m];
    }
    if let Some(v) = args.vectorizer {
        config.vectorizers = vec![v];
    }
    if let Some(j) = args.jobs {
        config.jobs = j;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }

    let outcome = harness::run_experiment(&config)?;
    for c in &outcome.collisions {
        eprintln!(
            "warning: text appears in both {} and {}: {:?}",
            c.splits.0, c.splits.1, c.normalized_text
        );
    }
    harness::write_artifacts(&outcome, &args.output)?;
    print!("{}", harness::format_leaderboard_table(&outcome.rows()));
    if let Some(report) = &outcome.best_row().test {
        println!();
        print!("{}", format_report(report, ReportStyle::Table));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Training(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
