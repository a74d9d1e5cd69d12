//! Deterministic text cleaning.
//!
//! [`Cleaner::clean`] applies the enabled rules in a fixed order:
//!
//! 1. strip URLs (`http://`, `https://`, `ftp://` and `www.` runs)
//! 2. strip placeholders (`#USER#`, `[...]`, `{...}`)
//! 3. strip emoji
//! 4. lowercase
//! 5. strip digit runs
//! 6. replace every character that is not an ASCII letter, digit or
//!    whitespace with a space
//! 7. split on whitespace
//! 8. drop stopwords
//! 9. lemmatize (tokens whose lemma is a stopword are dropped too)
//! 10. join with single spaces
//!
//! With every rule on the output is empty or matches `[a-z]+( [a-z]+)*`,
//! and cleaning is idempotent.

mod resources;

use std::sync::{Arc, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use resources::{LemmaTable, StopwordList, SuffixRule, BUNDLED_ID, MIN_STEM_CHARS};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("unknown resource {0:?} (not bundled and not a readable file)")]
    UnknownResource(String),
    #[error("invalid resource: {0}")]
    Resource(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    pub lowercase: bool,
    pub strip_urls: bool,
    pub strip_emoji: bool,
    pub strip_placeholders: bool,
    pub strip_numbers: bool,
    pub strip_special: bool,
    pub remove_stopwords: bool,
    pub lemmatize: bool,
    /// [`BUNDLED_ID`] or a path to a stopword file.
    pub stopword_list_id: String,
    /// [`BUNDLED_ID`] or a path to a lemma table file.
    pub lemma_table_id: String,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            lowercase: true,
            strip_urls: true,
            strip_emoji: true,
            strip_placeholders: true,
            strip_numbers: true,
            strip_special: true,
            remove_stopwords: true,
            lemmatize: true,
            stopword_list_id: BUNDLED_ID.to_string(),
            lemma_table_id: BUNDLED_ID.to_string(),
        }
    }
}

impl CleaningConfig {
    /// Every rule off; cleaning only re-joins whitespace-separated tokens.
    pub fn none() -> Self {
        CleaningConfig {
            lowercase: false,
            strip_urls: false,
            strip_emoji: false,
            strip_placeholders: false,
            strip_numbers: false,
            strip_special: false,
            remove_stopwords: false,
            lemmatize: false,
            ..Default::default()
        }
    }
}

/// A [`CleaningConfig`] with its stopword list and lemma table resolved.
#[derive(Debug, Clone)]
pub struct Cleaner {
    config: CleaningConfig,
    stopwords: Arc<StopwordList>,
    lemmas: Arc<LemmaTable>,
}

impl Cleaner {
    pub fn new(config: CleaningConfig) -> Result<Self, PreprocessError> {
        let stopwords = resources::resolve_stopwords(&config.stopword_list_id)?;
        let lemmas = resources::resolve_lemmas(&config.lemma_table_id)?;
        Ok(Cleaner {
            config,
            stopwords,
            lemmas,
        })
    }

    pub fn with_resources(config: CleaningConfig, stopwords: Arc<StopwordList>, lemmas: Arc<LemmaTable>) -> Self {
        Cleaner {
            config,
            stopwords,
            lemmas,
        }
    }

    /// The default pipeline with bundled resources.
    pub fn bundled() -> Self {
        Cleaner::with_resources(CleaningConfig::default(), StopwordList::bundled(), LemmaTable::bundled())
    }

    pub fn config(&self) -> &CleaningConfig {
        &self.config
    }

    pub fn stopwords(&self) -> &StopwordList {
        &self.stopwords
    }

    pub fn lemma_table(&self) -> &LemmaTable {
        &self.lemmas
    }

    pub fn clean(&self, text: &str) -> String {
        let c = &self.config;
        let mut s = text.to_string();
        if c.strip_urls {
            s = strip_urls(&s);
        }
        if c.strip_placeholders {
            s = strip_placeholders(&s);
        }
        if c.strip_emoji {
            s = strip_emoji(&s);
        }
        if c.lowercase {
            s = s.to_lowercase();
        }
        if c.strip_numbers {
            s = strip_numbers(&s);
        }
        if c.strip_special {
            s = strip_special(&s);
        }
        let mut tokens: Vec<String> = s.split_whitespace().map(str::to_string).collect();
        if c.remove_stopwords {
            tokens = remove_stopwords(tokens, &self.stopwords);
        }
        if c.lemmatize {
            tokens = lemmatize(tokens, &self.lemmas);
            if c.remove_stopwords {
                tokens = remove_stopwords(tokens, &self.stopwords);
            }
        }
        tokens.join(" ")
    }

    pub fn clean_all<'a, I: IntoIterator<Item = &'a str>>(&self, texts: I) -> Vec<String> {
        texts.into_iter().map(|t| self.clean(t)).collect()
    }
}

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("valid pattern"))
}

pub fn strip_urls(text: &str) -> String {
    static SCHEME: OnceLock<Regex> = OnceLock::new();
    static WWW: OnceLock<Regex> = OnceLock::new();
    let s = regex(&SCHEME, r"(?i)(?:https?|ftp)://\S+").replace_all(text, "");
    regex(&WWW, r"(?i)www\.\S*").replace_all(&s, "").into_owned()
}

/// Removes `#word#` placeholders and single-line `[...]` / `{...}` spans.
/// A lone `#` (or a leading-hash hashtag) is left for [`strip_special`].
pub fn strip_placeholders(text: &str) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    regex(&RE, r"#\w+#|\[[^\]\n]*\]|\{[^}\n]*\}")
        .replace_all(text, "")
        .into_owned()
}

const ZWJ: char = '\u{200D}';

fn is_emoji_part(c: char) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Extended_Pictographic does not cover skin-tone modifiers, regional
    // indicators (flags), keycap marks or tag characters, so they are listed
    // explicitly.
    let re = regex(
        &RE,
        r"^[\p{Extended_Pictographic}\p{Emoji_Modifier}\u{1F1E6}-\u{1F1FF}\u{FE0E}\u{FE0F}\u{20E3}\u{E0020}-\u{E007F}]$",
    );
    if c.is_ascii() {
        return false;
    }
    let mut buf = [0u8; 4];
    re.is_match(c.encode_utf8(&mut buf))
}

/// Removes pictographic code points, emoji modifiers and variation
/// selectors, plus zero-width joiners next to a removed code point.
pub fn strip_emoji(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let removed: Vec<bool> = chars.iter().map(|&c| is_emoji_part(c)).collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        if removed[i] {
            continue;
        }
        if c == ZWJ {
            let prev = i > 0 && removed[i - 1];
            let next = i + 1 < chars.len() && removed[i + 1];
            if prev || next {
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Deletes maximal runs of decimal digits.
pub fn strip_numbers(text: &str) -> String {
    static RE: OnceLock<Regex> = OnceLock::new();
    regex(&RE, r"\d+").replace_all(text, "").into_owned()
}

/// Replaces everything except ASCII letters, ASCII digits and whitespace
/// with a single space.
pub fn strip_special(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, list: &StopwordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !list.contains(t)).collect()
}

pub fn lemmatize(tokens: Vec<String>, table: &LemmaTable) -> Vec<String> {
    tokens.into_iter().map(|t| table.lemma(&t)).collect()
}
