//! Seeded generator for a keyword-separable benchmark corpus.
//!
//! Each document mixes neutral filler with words drawn from a class-specific
//! pool (at least one), plus a small rate of words from the other class's pool and the usual
//! social-media noise (handles, links, emoji, numbers). The class pools are
//! disjoint and survive cleaning unchanged, so a linear model over unigrams
//! can separate the classes almost perfectly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Document, Label, Split};

pub const HOPE_WORDS: &[&str] = &[
    "dream", "believe", "future", "tomorrow", "achieve", "courage", "faith", "goal", "strive", "brighter", "wish",
    "optimistic", "resolve", "aspire", "recover", "heal", "succeed", "progress", "promise", "grateful",
];

pub const NOT_HOPE_WORDS: &[&str] = &[
    "hopeless", "weary", "wreck", "gloomy", "alone", "despair", "awful", "worthless", "dread", "miserable", "bleak",
    "grief", "defeat", "doom", "pointless", "agony", "ruin", "empty", "fail", "numb",
];

pub const NEUTRAL_WORDS: &[&str] = &[
    "weather", "coffee", "train", "city", "phone", "music", "dinner", "office", "street", "movie", "book", "friend",
    "school", "market", "window", "garden", "bus", "kitchen", "game", "team", "river", "paper", "radio", "table",
    "monday", "lunch", "road", "class", "ticket", "picture",
];

const NOISE: &[&str] = &["@USER", "https://example.com/p", "😀", "🙏🏽", "2024", "#HASHTAG", "!!", "lol"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_docs: usize,
    pub seed: u64,
    /// Fractions for train and dev; the remainder is test.
    pub train_fraction: f64,
    pub dev_fraction: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Per-token probability of a word from the document's own class pool.
    pub own_rate: f64,
    /// Per-token probability of a word from the other class pool.
    pub cross_rate: f64,
    pub noise_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_docs: 1000,
            seed: 20240601,
            train_fraction: 0.6,
            dev_fraction: 0.2,
            min_tokens: 6,
            max_tokens: 14,
            own_rate: 0.35,
            cross_rate: 0.02,
            noise_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub train: Dataset,
    pub dev: Dataset,
    pub test: Dataset,
}

fn pool(label: Label) -> &'static [&'static str] {
    match label {
        Label::Hope => HOPE_WORDS,
        Label::NotHope => NOT_HOPE_WORDS,
    }
}

/// One labeled raw text.
pub fn sample_document<R: Rng>(rng: &mut R, label: Label, config: &SyntheticConfig) -> String {
    let other = match label {
        Label::Hope => Label::NotHope,
        Label::NotHope => Label::Hope,
    };
    let len = rng.gen_range(config.min_tokens..=config.max_tokens);
    let mut words = Vec::with_capacity(len);
    for _ in 0..len {
        let r: f64 = rng.gen();
        let word = if r < config.own_rate {
            pool(label).choose(rng)
        } else if r < config.own_rate + config.cross_rate {
            pool(other).choose(rng)
        } else if r < config.own_rate + config.cross_rate + config.noise_rate {
            NOISE.choose(rng)
        } else {
            NEUTRAL_WORDS.choose(rng)
        };
        words.push(*word.unwrap());
    }
    if !words.iter().any(|w| pool(label).contains(w)) {
        let at = rng.gen_range(0..words.len());
        words[at] = pool(label).choose(rng).unwrap();
    }
    if let Some(first) = words.first_mut() {
        // capitalised openers exercise the lowercase step
        if *first == "dream" {
            *first = "Dream";
        }
    }
    words.join(" ")
}

/// Balanced labels in shuffled order, split by position.
pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut labels: Vec<Label> = (0..config.n_docs)
        .map(|i| if i % 2 == 0 { Label::Hope } else { Label::NotHope })
        .collect();
    labels.shuffle(&mut rng);

    let n_train = (config.n_docs as f64 * config.train_fraction).round() as usize;
    let n_dev = (config.n_docs as f64 * config.dev_fraction).round() as usize;
    let mut splits = [Vec::new(), Vec::new(), Vec::new()];
    for (i, label) in labels.into_iter().enumerate() {
        let (slot, split) = if i < n_train {
            (0, Split::Train)
        } else if i < n_train + n_dev {
            (1, Split::Dev)
        } else {
            (2, Split::Test)
        };
        let text = sample_document(&mut rng, label, config);
        let id = format!("{}-{}", split.as_str(), splits[slot].len());
        splits[slot].push(Document {
            id,
            text,
            label: Some(label),
        });
    }
    let [train, dev, test] = splits;
    SyntheticCorpus {
        train: Dataset::new(Split::Train, train),
        dev: Dataset::new(Split::Dev, dev),
        test: Dataset::new(Split::Test, test),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::Cleaner;

    #[test]
    fn sizes_and_balance() {
        let c = generate(&SyntheticConfig::default());
        assert_eq!((c.train.len(), c.dev.len(), c.test.len()), (600, 200, 200));
        let hope = [&c.train, &c.dev, &c.test]
            .iter()
            .flat_map(|d| d.documents.iter())
            .filter(|d| d.label == Some(Label::Hope))
            .count();
        assert_eq!(hope, 500);
    }

    #[test]
    fn seeded() {
        let a = generate(&SyntheticConfig::default());
        assert_eq!(a, generate(&SyntheticConfig::default()));
        let b = generate(&SyntheticConfig {
            seed: 7,
            ..Default::default()
        });
        assert_ne!(a.train.documents, b.train.documents);
    }

    #[test]
    fn pools_survive_cleaning() {
        let cleaner = Cleaner::bundled();
        for w in HOPE_WORDS.iter().chain(NOT_HOPE_WORDS) {
            assert_eq!(cleaner.clean(w), *w, "{w}");
        }
        for w in HOPE_WORDS {
            assert!(!NOT_HOPE_WORDS.contains(w) && !NEUTRAL_WORDS.contains(w));
        }
    }
}
