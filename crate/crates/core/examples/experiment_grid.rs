//! The full vectorizer x model grid on the generated benchmark corpus,
//! with dev-set selection, a test report and artifacts on disk.
//!
//! cargo run --release --example experiment_grid -- [output-dir]

use std::path::PathBuf;

use hopeclf::harness::{self, GridSpec};
use hopeclf::metrics::{format_report, ReportStyle};
use hopeclf::synthetic::{generate, SyntheticConfig};

fn main() {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hopeclf-grid"));
    let corpus = generate(&SyntheticConfig::default());
    println!(
        "corpus: {} train, {} dev, {} test",
        corpus.train.len(),
        corpus.dev.len(),
        corpus.test.len()
    );

    let spec = GridSpec {
        jobs: 4,
        ..GridSpec::default()
    };
    let outcome = harness::run_experiment_on(&spec, 0, &corpus.train, &corpus.dev, Some(&corpus.test)).unwrap();
    print!("{}", harness::format_leaderboard_table(&outcome.rows()));

    let best = outcome.best_row();
    println!("\nselected {} + {}", best.model, best.vectorizer);
    if let Some(test) = &best.test {
        print!("{}", format_report(test, ReportStyle::Table));
    }
    for row in outcome.rows() {
        println!("  {:<10} {:<6} trained in {:>8.2} ms", row.model, row.vectorizer, row.train_time.as_secs_f64() * 1e3);
    }

    for path in harness::write_artifacts(&outcome, &out).unwrap() {
        println!("wrote {}", path.display());
    }
}
