//! Run the default cleaning pipeline, then a reduced one.
//!
//! cargo run --example clean_text -- "Dream BIG!! 🙏🏽 https://t.co/x @USER we're hoping for 2025"

use hopeclf::preprocess::{strip_emoji, strip_urls, Cleaner, CleaningConfig};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Dream BIG!! 🙏🏽 https://t.co/x @USER we're hoping for 2025, the kids were running".into());

    let cleaner = Cleaner::bundled();
    println!("input:    {text}");
    println!("cleaned:  {}", cleaner.clean(&text));

    // keep stopwords and surface forms
    let light = Cleaner::new(CleaningConfig {
        remove_stopwords: false,
        lemmatize: false,
        ..CleaningConfig::default()
    })
    .expect("bundled resources");
    println!("light:    {}", light.clean(&text));

    // the individual rules are public too
    println!("no urls:  {}", strip_urls(&text));
    println!("no emoji: {}", strip_emoji(&text));
    println!(
        "resources: stopwords {} ({} words), lemmas {}",
        cleaner.stopwords().version(),
        cleaner.stopwords().len(),
        cleaner.config().lemma_table_id
    );
}
