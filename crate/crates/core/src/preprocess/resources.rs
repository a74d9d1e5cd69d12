//! Stopword lists and lemma tables.
//!
//! Both are plain-text files whose first line is `# version: <id>`. Further
//! `#` lines are comments. A stopword file has one lowercase token per line;
//! a lemma table has `inflected<TAB>lemma` lines and suffix rules written as
//! `-suffix<TAB>-replacement`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use super::PreprocessError;

/// Identifier of the stopword list and lemma table shipped with the crate.
pub const BUNDLED_ID: &str = "en-1";

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords-en.txt");
const BUNDLED_LEMMAS: &str = include_str!("../../data/lemmas-en.txt");

/// Shortest stem a suffix rule may leave behind.
pub const MIN_STEM_CHARS: usize = 3;

fn split_header<'a>(text: &'a str, what: &str) -> Result<(String, impl Iterator<Item = (usize, &'a str)>), PreprocessError> {
    let mut lines = text.lines().enumerate();
    let version = lines
        .next()
        .and_then(|(_, l)| l.strip_prefix("# version:"))
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .ok_or_else(|| PreprocessError::Resource(format!("{what}: missing '# version:' header line")))?;
    let body = lines
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    Ok((version, body))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    version: String,
    words: HashSet<String>,
}

impl StopwordList {
    pub fn parse(text: &str) -> Result<Self, PreprocessError> {
        let (version, body) = split_header(text, "stopword list")?;
        let mut words = HashSet::new();
        for (line_no, line) in body {
            let word = line.trim();
            if word.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
                return Err(PreprocessError::Resource(format!(
                    "stopword list line {line_no}: {word:?} is not a lowercase token"
                )));
            }
            words.insert(word.to_string());
        }
        Ok(StopwordList { version, words })
    }

    pub fn bundled() -> Arc<StopwordList> {
        static LIST: OnceLock<Arc<StopwordList>> = OnceLock::new();
        LIST.get_or_init(|| Arc::new(StopwordList::parse(BUNDLED_STOPWORDS).expect("bundled stopword list is valid")))
            .clone()
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaTable {
    version: String,
    dictionary: HashMap<String, String>,
    rules: Vec<SuffixRule>,
}

impl LemmaTable {
    pub fn new(version: impl Into<String>, dictionary: HashMap<String, String>, rules: Vec<SuffixRule>) -> Self {
        LemmaTable {
            version: version.into(),
            dictionary,
            rules,
        }
    }

    pub fn parse(text: &str) -> Result<Self, PreprocessError> {
        let (version, body) = split_header(text, "lemma table")?;
        let mut dictionary = HashMap::new();
        let mut rules = Vec::new();
        for (line_no, line) in body {
            let bad = |msg: &str| PreprocessError::Resource(format!("lemma table line {line_no}: {msg}"));
            let (left, right) = line.split_once('\t').ok_or_else(|| bad("expected two tab-separated fields"))?;
            if let Some(suffix) = left.strip_prefix('-') {
                let replacement = right.strip_prefix('-').ok_or_else(|| bad("suffix rule replacement must start with '-'"))?;
                if suffix.is_empty() {
                    return Err(bad("empty suffix"));
                }
                rules.push(SuffixRule {
                    suffix: suffix.to_string(),
                    replacement: replacement.to_string(),
                });
            } else {
                if left.is_empty() || right.is_empty() {
                    return Err(bad("empty dictionary entry"));
                }
                if dictionary.insert(left.to_string(), right.to_string()).is_some() {
                    return Err(bad(&format!("duplicate entry {left:?}")));
                }
            }
        }
        Ok(LemmaTable {
            version,
            dictionary,
            rules,
        })
    }

    pub fn bundled() -> Arc<LemmaTable> {
        static TABLE: OnceLock<Arc<LemmaTable>> = OnceLock::new();
        TABLE
            .get_or_init(|| Arc::new(LemmaTable::parse(BUNDLED_LEMMAS).expect("bundled lemma table is valid")))
            .clone()
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn dictionary(&self) -> &HashMap<String, String> {
        &self.dictionary
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    /// One rewrite: dictionary entry, else first matching suffix rule, else
    /// the token itself.
    pub fn step<'a>(&'a self, token: &'a str) -> std::borrow::Cow<'a, str> {
        use std::borrow::Cow;
        if let Some(lemma) = self.dictionary.get(token) {
            return Cow::Borrowed(lemma);
        }
        for rule in &self.rules {
            if let Some(stem) = token.strip_suffix(rule.suffix.as_str()) {
                if stem.chars().count() >= MIN_STEM_CHARS {
                    if rule.replacement == rule.suffix {
                        return Cow::Borrowed(token);
                    }
                    return Cow::Owned(format!("{stem}{}", rule.replacement));
                }
            }
        }
        Cow::Borrowed(token)
    }

    /// Rewrite until the token no longer changes, so every lemma is itself a
    /// fixed point of the table.
    pub fn lemma(&self, token: &str) -> String {
        let mut current = token.to_string();
        // each rewrite either stops or comes from a finite table; the bound
        // only guards against cyclic dictionaries
        for _ in 0..=self.dictionary.len() + token.len() {
            let next = self.step(&current);
            if next == current {
                break;
            }
            current = next.into_owned();
        }
        current
    }
}

pub(crate) fn resolve_stopwords(id: &str) -> Result<Arc<StopwordList>, PreprocessError> {
    if id == BUNDLED_ID {
        return Ok(StopwordList::bundled());
    }
    let text = read_resource(id)?;
    Ok(Arc::new(StopwordList::parse(&text)?))
}

pub(crate) fn resolve_lemmas(id: &str) -> Result<Arc<LemmaTable>, PreprocessError> {
    if id == BUNDLED_ID {
        return Ok(LemmaTable::bundled());
    }
    let text = read_resource(id)?;
    Ok(Arc::new(LemmaTable::parse(&text)?))
}

fn read_resource(id: &str) -> Result<String, PreprocessError> {
    let path = Path::new(id);
    if !path.is_file() {
        return Err(PreprocessError::UnknownResource(id.to_string()));
    }
    fs::read_to_string(path).map_err(|e| PreprocessError::Resource(format!("{id}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_stopwords_are_lowercase_and_nonempty() {
        let list = StopwordList::bundled();
        assert_eq!(list.version(), BUNDLED_ID);
        assert_eq!(list.len(), 179);
        for w in list.iter() {
            assert!(!w.is_empty());
            assert_eq!(w, w.to_lowercase());
        }
        assert!(list.contains("the"));
        assert!(!list.contains("hope"));
    }

    #[test]
    fn bundled_lemma_values_are_fixed_points() {
        let table = LemmaTable::bundled();
        assert_eq!(table.version(), BUNDLED_ID);
        for (inflected, lemma) in table.dictionary() {
            assert_eq!(table.step(lemma), lemma.as_str(), "{inflected} -> {lemma} is not stable");
        }
    }

    #[test]
    fn dictionary_beats_rules_and_rules_in_order() {
        let table = LemmaTable::bundled();
        assert_eq!(table.lemma("was"), "be");
        assert_eq!(table.lemma("running"), "run");
        assert_eq!(table.lemma("stories"), "story");
        assert_eq!(table.lemma("cats"), "cat");
        assert_eq!(table.lemma("glass"), "glass");
        assert_eq!(table.lemma("bus"), "bus");
        assert_eq!(table.lemma("feelings"), "feel");
        // stem would be shorter than three characters
        assert_eq!(table.lemma("king"), "king");
        assert_eq!(table.lemma("red"), "red");
    }

    #[test]
    fn header_is_required() {
        assert!(StopwordList::parse("the\nand\n").is_err());
        assert!(LemmaTable::parse("was\tbe\n").is_err());
        assert!(StopwordList::parse("# version: x\nThe\n").is_err());
        assert!(LemmaTable::parse("# version: x\nwas be\n").is_err());
        assert!(LemmaTable::parse("# version: x\nwas\tbe\nwas\tbee\n").is_err());
    }

    #[test]
    fn unknown_resource_id() {
        assert!(matches!(
            resolve_stopwords("no-such-list"),
            Err(PreprocessError::UnknownResource(_))
        ));
    }
}
