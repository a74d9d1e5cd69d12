//! Single-file model bundles.
//!
//! A bundle holds everything needed to classify raw text: the cleaning
//! configuration, the fitted vocabulary (with its n-gram settings), the
//! optional idf vector, and the classifier parameters. The file is UTF-8
//! text:
//!
//! ```text
//! hopeclf-bundle 1
//! [cleaning]
//! [ngram]
//! [vocabulary]
//! [tfidf]
//! [model]
//! [checksum]
//! sha256<TAB><hex digest of every byte before the [checksum] line>
//! ```
//!
//! Sections always appear in this order with `key<TAB>value` lines inside.
//! Reals are written with 17 significant digits so they read back exactly,
//! which makes save, load, save byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::Label;
use crate::features::{Analyzer, NGramConfig, SparseVector, TfidfModel, Vectorizer, VectorizerKind, Vocabulary};
use crate::metrics::format_real;
use crate::models::{KernelKind, LinearKind, LinearModel, Model, ModelKind, NBModel, SvmModel};
use crate::preprocess::{Cleaner, CleaningConfig, PreprocessError};

pub const FORMAT_VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: std::ops::RangeInclusive<u32> = 1..=1;
const MAGIC: &str = "hopeclf-bundle ";
const CHECKSUM_SECTION: &str = "[checksum]\n";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("malformed bundle: {0}")]
    Format(String),
    #[error("checksum error: {0}")]
    Checksum(String),
    #[error("unsupported bundle version {0} (supported: {min}..={max})", min = SUPPORTED_VERSIONS.start(), max = SUPPORTED_VERSIONS.end())]
    Version(u32),
    #[error("inconsistent bundle: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, PersistError>;

/// A trained pipeline: cleaning, features and classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub cleaning: CleaningConfig,
    pub vectorizer: Vectorizer,
    pub model: Model,
}

impl ModelBundle {
    pub fn new(cleaning: CleaningConfig, vectorizer: Vectorizer, model: Model) -> Result<Self> {
        let bundle = ModelBundle {
            cleaning,
            vectorizer,
            model,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn ngram(&self) -> &NGramConfig {
        self.vectorizer.vocabulary.config()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vectorizer.vocabulary
    }

    pub fn tfidf(&self) -> Option<&TfidfModel> {
        self.vectorizer.tfidf.as_ref()
    }

    pub fn vectorizer_kind(&self) -> VectorizerKind {
        self.vectorizer.kind()
    }

    pub fn model_kind(&self) -> ModelKind {
        match &self.model {
            Model::NaiveBayes(_) => ModelKind::Nb,
            Model::Linear(m) if m.kind == LinearKind::Logistic => ModelKind::Logreg,
            Model::Linear(_) => ModelKind::SvmLinear,
            Model::Svm(m) if m.kernel == KernelKind::Linear => ModelKind::SvmLinear,
            Model::Svm(_) => ModelKind::SvmRbf,
        }
    }

    /// Dimensions agree across vocabulary, idf and model; model invariants
    /// hold; text fields contain no line breaks or tabs.
    pub fn validate(&self) -> Result<()> {
        let v = self.vocabulary().len();
        if let Some(tfidf) = self.tfidf() {
            if tfidf.dim() != v {
                return Err(PersistError::Invariant(format!(
                    "idf has {} entries for a vocabulary of {v}",
                    tfidf.dim()
                )));
            }
        }
        if self.model.n_features() != v {
            return Err(PersistError::Invariant(format!(
                "model expects {} features, vocabulary has {v}",
                self.model.n_features()
            )));
        }
        self.model
            .validate()
            .map_err(|e| PersistError::Invariant(e.to_string()))?;
        for id in [&self.cleaning.stopword_list_id, &self.cleaning.lemma_table_id] {
            if id.is_empty() || id.contains(['\n', '\r', '\t']) {
                return Err(PersistError::Invariant(format!("resource id {id:?} is not a single-line value")));
            }
        }
        Ok(())
    }

    /// Errors unless this bundle was trained with exactly `cleaning` and
    /// `ngram`.
    pub fn ensure_compatible(&self, cleaning: &CleaningConfig, ngram: &NGramConfig) -> Result<()> {
        if &self.cleaning != cleaning {
            return Err(PersistError::Invariant("bundle cleaning config differs from the pipeline config".into()));
        }
        if self.ngram() != ngram {
            return Err(PersistError::Invariant("bundle n-gram config differs from the pipeline config".into()));
        }
        Ok(())
    }

    pub fn cleaner(&self) -> std::result::Result<Cleaner, PreprocessError> {
        Cleaner::new(self.cleaning.clone())
    }

    /// Clean, vectorize and classify raw texts.
    pub fn predict_texts<'a, I: IntoIterator<Item = &'a str>>(&self, texts: I) -> std::result::Result<Vec<Label>, crate::harness::HarnessError> {
        let cleaner = self.cleaner()?;
        texts
            .into_iter()
            .map(|t| {
                let x = self.vectorizer.transform(&cleaner.clean(t));
                Ok(self.model.predict(&x)?)
            })
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut body = self.body();
        let digest = sha256_hex(body.as_bytes());
        body.push_str(CHECKSUM_SECTION);
        let _ = writeln!(body, "sha256\t{digest}");
        Ok(body.into_bytes())
    }

    /// Hex SHA-256 of the canonical serialization (the value stored in the
    /// checksum section).
    pub fn checksum(&self) -> String {
        sha256_hex(self.body().as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        ModelBundle::from_bytes(&fs::read(path)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() {
            return Err(PersistError::Format("empty file".into()));
        }
        let magic = MAGIC.as_bytes();
        let looks_like_bundle = bytes.starts_with(magic) || magic.starts_with(bytes);
        if !looks_like_bundle {
            return Err(PersistError::Format("not a model bundle (bad magic line)".into()));
        }
        let text = std::str::from_utf8(bytes).map_err(|_| PersistError::Checksum("file is not valid UTF-8".into()))?;
        let body = verify_checksum(text)?;
        let (header, rest) = body
            .split_once('\n')
            .ok_or_else(|| PersistError::Format("missing header line".into()))?;
        let version: u32 = header[MAGIC.len()..]
            .trim()
            .parse()
            .map_err(|_| PersistError::Format(format!("bad header {header:?}")))?;
        if !SUPPORTED_VERSIONS.contains(&version) {
            return Err(PersistError::Version(version));
        }
        let bundle = parse_body(rest)?;
        bundle.validate()?;
        Ok(bundle)
    }

    fn body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}{FORMAT_VERSION}");

        let c = &self.cleaning;
        s.push_str("[cleaning]\n");
        for (k, v) in [
            ("lowercase", c.lowercase),
            ("strip_urls", c.strip_urls),
            ("strip_placeholders", c.strip_placeholders),
            ("strip_emoji", c.strip_emoji),
            ("strip_numbers", c.strip_numbers),
            ("strip_special", c.strip_special),
            ("remove_stopwords", c.remove_stopwords),
            ("lemmatize", c.lemmatize),
        ] {
            let _ = writeln!(s, "{k}\t{v}");
        }
        let _ = writeln!(s, "stopword_list_id\t{}", c.stopword_list_id);
        let _ = writeln!(s, "lemma_table_id\t{}", c.lemma_table_id);

        let n = self.ngram();
        s.push_str("[ngram]\n");
        let _ = writeln!(s, "min_n\t{}", n.min_n);
        let _ = writeln!(s, "max_n\t{}", n.max_n);
        let _ = writeln!(s, "analyzer\tword");
        let _ = writeln!(s, "min_df\t{}", n.min_df);
        let _ = writeln!(
            s,
            "max_features\t{}",
            n.max_features.map_or("none".into(), |m| m.to_string())
        );

        let vocab = self.vocabulary();
        s.push_str("[vocabulary]\n");
        let _ = writeln!(s, "size\t{}", vocab.len());
        for (i, t) in vocab.terms().iter().enumerate() {
            let _ = writeln!(s, "{t}\t{i}");
        }

        s.push_str("[tfidf]\n");
        match self.tfidf() {
            None => s.push_str("present\tfalse\n"),
            Some(m) => {
                s.push_str("present\ttrue\n");
                for v in m.idf() {
                    let _ = writeln!(s, "{}", format_real(*v));
                }
            }
        }

        s.push_str("[model]\n");
        match &self.model {
            Model::NaiveBayes(m) => {
                s.push_str("kind\tnb\n");
                let _ = writeln!(s, "alpha\t{}", format_real(m.alpha));
                let _ = writeln!(
                    s,
                    "log_prior\t{}\t{}",
                    format_real(m.class_log_prior[0]),
                    format_real(m.class_log_prior[1])
                );
                let _ = writeln!(s, "features\t{}", m.n_features());
                for (a, b) in m.feature_log_prob[0].iter().zip(&m.feature_log_prob[1]) {
                    let _ = writeln!(s, "{}\t{}", format_real(*a), format_real(*b));
                }
            }
            Model::Linear(m) => {
                s.push_str("kind\tlinear\n");
                let _ = writeln!(s, "variant\t{}", m.kind.name());
                let _ = writeln!(s, "c\t{}", format_real(m.c));
                let _ = writeln!(s, "bias\t{}", format_real(m.bias));
                let _ = writeln!(s, "features\t{}", m.weights.len());
                for w in &m.weights {
                    let _ = writeln!(s, "{}", format_real(*w));
                }
            }
            Model::Svm(m) => {
                s.push_str("kind\tsvm\n");
                let kernel = match m.kernel {
                    KernelKind::Linear => "linear",
                    KernelKind::Rbf => "rbf",
                };
                let _ = writeln!(s, "kernel\t{kernel}");
                let _ = writeln!(s, "gamma\t{}", format_real(m.gamma));
                let _ = writeln!(s, "c\t{}", format_real(m.c));
                let _ = writeln!(s, "bias\t{}", format_real(m.bias));
                let _ = writeln!(s, "features\t{}", m.n_features);
                let _ = writeln!(s, "support_vectors\t{}", m.support_vectors.len());
                for (coef, sv) in m.dual_coef.iter().zip(&m.support_vectors) {
                    s.push_str(&format_real(*coef));
                    s.push('\t');
                    let entries: Vec<String> = sv.iter().map(|(i, v)| format!("{i}:{}", format_real(v))).collect();
                    s.push_str(&entries.join(" "));
                    s.push('\n');
                }
            }
        }
        s
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Returns the checksummed prefix when the trailing digest matches.
fn verify_checksum(text: &str) -> Result<&str> {
    let pos = text
        .rfind(&format!("\n{CHECKSUM_SECTION}"))
        .ok_or_else(|| PersistError::Checksum("missing checksum section (truncated file?)".into()))?;
    let body = &text[..pos + 1];
    let trailer = &text[pos + 1 + CHECKSUM_SECTION.len()..];
    let stored = trailer
        .strip_prefix("sha256\t")
        .and_then(|t| t.strip_suffix('\n'))
        .ok_or_else(|| PersistError::Checksum("malformed checksum line".into()))?;
    let actual = sha256_hex(body.as_bytes());
    if stored != actual {
        return Err(PersistError::Checksum(format!("stored {stored}, computed {actual}")));
    }
    Ok(body)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 2, l))
            .ok_or_else(|| PersistError::Format("unexpected end of bundle".into()))
    }

    fn section(&mut self, name: &str) -> Result<()> {
        let (line, text) = self.next_line()?;
        if text != format!("[{name}]") {
            return Err(PersistError::Format(format!("line {line}: expected [{name}], found {text:?}")));
        }
        Ok(())
    }

    fn value(&mut self, key: &str) -> Result<&'a str> {
        let (line, text) = self.next_line()?;
        text.strip_prefix(key)
            .and_then(|r| r.strip_prefix('\t'))
            .ok_or_else(|| PersistError::Format(format!("line {line}: expected key {key:?}, found {text:?}")))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.value(key)?;
        v.parse()
            .map_err(|_| PersistError::Format(format!("{key}: cannot parse {v:?}")))
    }

    fn boolean(&mut self, key: &str) -> Result<bool> {
        match self.value(key)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(PersistError::Format(format!("{key}: expected true/false, found {other:?}"))),
        }
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let v = self.value(key)?;
        parse_real(v)
    }

    fn bare_real(&mut self) -> Result<f64> {
        let (_, text) = self.next_line()?;
        parse_real(text)
    }
}

fn parse_real(text: &str) -> Result<f64> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| PersistError::Format(format!("not a finite real: {text:?}")))
}

fn parse_body(text: &str) -> Result<ModelBundle> {
    let mut lines = Lines::new(text);

    lines.section("cleaning")?;
    let mut cleaning = CleaningConfig {
        lowercase: lines.boolean("lowercase")?,
        strip_urls: lines.boolean("strip_urls")?,
        strip_placeholders: lines.boolean("strip_placeholders")?,
        strip_emoji: lines.boolean("strip_emoji")?,
        strip_numbers: lines.boolean("strip_numbers")?,
        strip_special: lines.boolean("strip_special")?,
        remove_stopwords: lines.boolean("remove_stopwords")?,
        lemmatize: lines.boolean("lemmatize")?,
        ..CleaningConfig::default()
    };
    cleaning.stopword_list_id = lines.value("stopword_list_id")?.to_string();
    cleaning.lemma_table_id = lines.value("lemma_table_id")?.to_string();

    lines.section("ngram")?;
    let min_n = lines.parsed("min_n")?;
    let max_n = lines.parsed("max_n")?;
    if lines.value("analyzer")? != "word" {
        return Err(PersistError::Format("only the word analyzer is supported".into()));
    }
    let min_df = lines.parsed("min_df")?;
    let max_features = match lines.value("max_features")? {
        "none" => None,
        v => Some(
            v.parse()
                .map_err(|_| PersistError::Format(format!("max_features: cannot parse {v:?}")))?,
        ),
    };
    let ngram = NGramConfig {
        min_n,
        max_n,
        analyzer: Analyzer::Word,
        min_df,
        max_features,
    };

    lines.section("vocabulary")?;
    let size: usize = lines.parsed("size")?;
    let mut vocab_text = Vocabulary::header_lines(&ngram);
    for _ in 0..size {
        let (_, l) = lines.next_line()?;
        vocab_text.push(l.to_string());
    }
    let vocabulary = Vocabulary::parse_lines(vocab_text.iter().map(String::as_str))
        .map_err(|e| PersistError::Format(format!("vocabulary: {e}")))?;

    lines.section("tfidf")?;
    let tfidf = if lines.boolean("present")? {
        let idf = (0..size).map(|_| lines.bare_real()).collect::<Result<Vec<_>>>()?;
        Some(TfidfModel::from_idf(idf).map_err(|e| PersistError::Invariant(e.to_string()))?)
    } else {
        None
    };

    lines.section("model")?;
    let model = match lines.value("kind")? {
        "nb" => {
            let alpha = lines.real("alpha")?;
            let priors = lines.value("log_prior")?;
            let (a, b) = priors
                .split_once('\t')
                .ok_or_else(|| PersistError::Format("log_prior needs two values".into()))?;
            let class_log_prior = [parse_real(a)?, parse_real(b)?];
            let features: usize = lines.parsed("features")?;
            let mut hope = Vec::with_capacity(features);
            let mut not_hope = Vec::with_capacity(features);
            for _ in 0..features {
                let (line, l) = lines.next_line()?;
                let (a, b) = l
                    .split_once('\t')
                    .ok_or_else(|| PersistError::Format(format!("line {line}: expected two log-likelihoods")))?;
                hope.push(parse_real(a)?);
                not_hope.push(parse_real(b)?);
            }
            Model::NaiveBayes(NBModel {
                class_log_prior,
                feature_log_prob: [hope, not_hope],
                alpha,
            })
        }
        "linear" => {
            let kind = match lines.value("variant")? {
                "logistic" => LinearKind::Logistic,
                "svm-linear" => LinearKind::SvmLinear,
                other => return Err(PersistError::Format(format!("unknown linear variant {other:?}"))),
            };
            let c = lines.real("c")?;
            let bias = lines.real("bias")?;
            let features: usize = lines.parsed("features")?;
            let weights = (0..features).map(|_| lines.bare_real()).collect::<Result<Vec<_>>>()?;
            Model::Linear(LinearModel { weights, bias, c, kind })
        }
        "svm" => {
            let kernel = match lines.value("kernel")? {
                "linear" => KernelKind::Linear,
                "rbf" => KernelKind::Rbf,
                other => return Err(PersistError::Format(format!("unknown kernel {other:?}"))),
            };
            let gamma = lines.real("gamma")?;
            let c = lines.real("c")?;
            let bias = lines.real("bias")?;
            let n_features: usize = lines.parsed("features")?;
            let count: usize = lines.parsed("support_vectors")?;
            let mut coefs = Vec::with_capacity(count);
            let mut svs = Vec::with_capacity(count);
            for _ in 0..count {
                let (line, l) = lines.next_line()?;
                let (coef, entries) = l
                    .split_once('\t')
                    .ok_or_else(|| PersistError::Format(format!("line {line}: expected coef<TAB>entries")))?;
                coefs.push(parse_real(coef)?);
                let mut indices = Vec::new();
                let mut values = Vec::new();
                for entry in entries.split(' ').filter(|e| !e.is_empty()) {
                    let (i, v) = entry
                        .split_once(':')
                        .ok_or_else(|| PersistError::Format(format!("line {line}: bad entry {entry:?}")))?;
                    indices.push(
                        i.parse()
                            .map_err(|_| PersistError::Format(format!("line {line}: bad index {i:?}")))?,
                    );
                    values.push(parse_real(v)?);
                }
                svs.push(SparseVector::new(indices, values).map_err(|e| PersistError::Invariant(e.to_string()))?);
            }
            Model::Svm(
                SvmModel::new(kernel, gamma, coefs, svs, bias, c, n_features)
                    .map_err(|e| PersistError::Invariant(e.to_string()))?,
            )
        }
        other => return Err(PersistError::Format(format!("unknown model kind {other:?}"))),
    };

    if let Some((line, l)) = lines.inner.next() {
        return Err(PersistError::Format(format!("line {}: trailing content {l:?}", line + 2)));
    }

    Ok(ModelBundle {
        cleaning,
        vectorizer: Vectorizer { vocabulary, tfidf },
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SparseMatrix;
    use crate::models::{train_logreg, train_nb, train_svm, KernelConfig, LogRegParams, SvmParams};

    fn corpus() -> (Vec<&'static str>, Vec<Label>) {
        (
            vec!["hope good", "hope rise", "sad bad"],
            vec![Label::Hope, Label::Hope, Label::NotHope],
        )
    }

    fn nb_bundle() -> ModelBundle {
        let (docs, y) = corpus();
        let vec = Vectorizer::fit(&docs, &NGramConfig::with_range(1, 1), VectorizerKind::Count).unwrap();
        let nb = train_nb(&vec.transform_all(&docs), &y, 1.0).unwrap();
        ModelBundle::new(CleaningConfig::default(), vec, Model::NaiveBayes(nb)).unwrap()
    }

    fn all_bundles() -> Vec<ModelBundle> {
        let (docs, y) = corpus();
        let vec = Vectorizer::fit(&docs, &NGramConfig::with_range(1, 2), VectorizerKind::Tfidf).unwrap();
        let x: SparseMatrix = vec.transform_all(&docs);
        let lr = train_logreg(&x, &y, &LogRegParams::default()).unwrap().0;
        let (rbf, _) = train_svm(&x, &y, &SvmParams::default()).unwrap();
        let (lin, _) = train_svm(&x, &y, &SvmParams { kernel: KernelConfig::linear(), ..Default::default() }).unwrap();
        vec![
            nb_bundle(),
            ModelBundle::new(CleaningConfig::default(), vec.clone(), Model::Linear(lr)).unwrap(),
            ModelBundle::new(CleaningConfig::default(), vec.clone(), Model::Svm(rbf)).unwrap(),
            ModelBundle::new(CleaningConfig::none(), vec.clone(), Model::Linear(lin.to_linear().unwrap())).unwrap(),
            ModelBundle::new(CleaningConfig::default(), vec, Model::Svm(lin)).unwrap(),
        ]
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        for bundle in all_bundles() {
            let bytes = bundle.to_bytes().unwrap();
            let back = ModelBundle::from_bytes(&bytes).unwrap();
            assert_eq!(back, bundle);
            assert_eq!(back.to_bytes().unwrap(), bytes);
        }
    }

    #[test]
    fn nb_posteriors_survive_round_trip() {
        let bundle = nb_bundle();
        let back = ModelBundle::from_bytes(&bundle.to_bytes().unwrap()).unwrap();
        let x = bundle.vocabulary().count_text("hope");
        let (Model::NaiveBayes(a), Model::NaiveBayes(b)) = (&bundle.model, &back.model) else {
            panic!("expected naive Bayes");
        };
        let (pa, pb) = (a.predict(&x).unwrap().1, b.predict(&x).unwrap().1);
        assert!((pa[0] - pb[0]).abs() <= 1e-15);
        assert!((pa[0] - 14.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn tampering_is_detected() {
        let bytes = nb_bundle().to_bytes().unwrap();
        let mut text = String::from_utf8(bytes.clone()).unwrap();
        text = text.replacen("alpha\t1.0000000000000000e0", "alpha\t2.0000000000000000e0", 1);
        assert!(matches!(ModelBundle::from_bytes(text.as_bytes()), Err(PersistError::Checksum(_))));

        let mut bad_sum = bytes.clone();
        let n = bad_sum.len();
        bad_sum[n - 2] = if bad_sum[n - 2] == b'0' { b'1' } else { b'0' };
        assert!(matches!(ModelBundle::from_bytes(&bad_sum), Err(PersistError::Checksum(_))));

        for cut in [bytes.len() / 2, bytes.len() - 5, 7] {
            assert!(matches!(ModelBundle::from_bytes(&bytes[..cut]), Err(PersistError::Checksum(_))), "cut {cut}");
        }
    }

    #[test]
    fn empty_and_foreign_files_are_format_errors() {
        assert!(matches!(ModelBundle::from_bytes(b""), Err(PersistError::Format(_))));
        assert!(matches!(ModelBundle::from_bytes(b"text,label\n"), Err(PersistError::Format(_))));
    }

    fn reseal(body: &str) -> Vec<u8> {
        format!("{body}{CHECKSUM_SECTION}sha256\t{}\n", sha256_hex(body.as_bytes())).into_bytes()
    }

    #[test]
    fn unsupported_version() {
        let body = nb_bundle().body().replacen("hopeclf-bundle 1", "hopeclf-bundle 9", 1);
        assert!(matches!(ModelBundle::from_bytes(&reseal(&body)), Err(PersistError::Version(9))));
    }

    #[test]
    fn invariant_violation_on_load() {
        // log-likelihoods that no longer normalize, resealed with a valid checksum
        let body = nb_bundle().body();
        let marker = "features\t5\n";
        let start = body.find(marker).unwrap() + marker.len();
        let end = start + body[start..].find('\t').unwrap();
        let mut tampered = body.clone();
        tampered.replace_range(start..end, "-1.0000000000000000e-1");
        assert!(matches!(ModelBundle::from_bytes(&reseal(&tampered)), Err(PersistError::Invariant(_))));
    }

    #[test]
    fn dimension_mismatch_rejected_before_write() {
        let mut bundle = nb_bundle();
        if let Model::NaiveBayes(m) = &mut bundle.model {
            m.feature_log_prob[0].pop();
            m.feature_log_prob[1].pop();
        }
        assert!(matches!(bundle.to_bytes(), Err(PersistError::Invariant(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.bundle");
        assert!(bundle.save(&path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn compatibility_check() {
        let bundle = nb_bundle();
        assert!(bundle.ensure_compatible(&CleaningConfig::default(), &NGramConfig::with_range(1, 1)).is_ok());
        assert!(bundle.ensure_compatible(&CleaningConfig::default(), &NGramConfig::default()).is_err());
        assert!(bundle.ensure_compatible(&CleaningConfig::none(), &NGramConfig::with_range(1, 1)).is_err());
    }
}
