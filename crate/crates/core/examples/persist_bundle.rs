//! Train a pipeline, save it as a bundle, reload it and classify raw text.

use hopeclf::corpus::{Dataset, Document, Label, Split};
use hopeclf::features::{NGramConfig, VectorizerKind};
use hopeclf::harness::train_pipeline;
use hopeclf::models::{Hyperparameters, ModelKind};
use hopeclf::persist::{ModelBundle, PersistError};
use hopeclf::preprocess::CleaningConfig;

fn main() {
    let rows = [
        ("We will get through this, keep the faith!", Label::Hope),
        ("Dreaming of brighter days ahead 🌞", Label::Hope),
        ("I believe tomorrow will be better", Label::Hope),
        ("Everything is awful and nothing helps", Label::NotHope),
        ("So tired of this, it feels hopeless", Label::NotHope),
        ("Another bleak grey day, what's the point", Label::NotHope),
    ];
    let train = Dataset::new(
        Split::Train,
        rows.iter()
            .enumerate()
            .map(|(i, (t, l))| Document {
                id: format!("t{i}"),
                text: t.to_string(),
                label: Some(*l),
            })
            .collect(),
    );
    let bundle = train_pipeline(
        &CleaningConfig::default(),
        &NGramConfig::with_range(1, 2),
        VectorizerKind::Tfidf,
        ModelKind::Logreg,
        &Hyperparameters::default(),
        &train,
    )
    .unwrap();

    let path = std::env::temp_dir().join("hopeclf-example.bundle");
    bundle.save(&path).unwrap();
    let loaded = ModelBundle::load(&path).unwrap();
    assert_eq!(loaded, bundle);
    println!("saved {} ({} features), sha256 {}", path.display(), loaded.vocabulary().len(), loaded.checksum());

    let queries = ["keep the faith, better days ahead", "this is hopeless and awful"];
    for (q, label) in queries.iter().zip(loaded.predict_texts(queries).unwrap()) {
        println!("{q:<36} -> {label}");
    }

    // any edit breaks the checksum
    let mut bytes = std::fs::read(&path).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 1;
    match ModelBundle::from_bytes(&bytes) {
        Err(PersistError::Checksum(msg)) => println!("tampered copy rejected: {msg}"),
        other => println!("unexpected: {other:?}"),
    }
}
