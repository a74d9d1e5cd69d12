//! Labeled text datasets: loading, class statistics and split checks.
//!
//! Three on-disk layouts are understood: CSV and TSV with a header row, and
//! JSON lines where every line is an object with a `"text"` key and an
//! optional `"label"` (and `"id"`) key. Row order in the file is the
//! document order of the resulting [`Dataset`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("row {row}: expected {expected} columns, found {found}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: unknown label {value:?}")]
    UnknownLabel { row: usize, value: String },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("row {row}: {split} documents must be labeled")]
    MissingLabel { row: usize, split: Split },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("document {0:?} has no label")]
    Unlabeled(String),
    #[error("unknown label {0:?}")]
    BadLabel(String),
    #[error("unknown dataset format {0:?} (expected csv, tsv or jsonl)")]
    BadFormat(String),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// Binary class label. The discriminant is the canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Hope = 0,
    NotHope = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Hope, Label::NotHope];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }

    /// `+1` for Hope, `-1` for NotHope; the margin convention of the linear
    /// and kernel models.
    pub fn sign(self) -> f64 {
        match self {
            Label::Hope => 1.0,
            Label::NotHope => -1.0,
        }
    }

    /// Hope iff `value >= 0`.
    pub fn from_decision(value: f64) -> Label {
        if value >= 0.0 {
            Label::Hope
        } else {
            Label::NotHope
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Hope => "Hope",
            Label::NotHope => "Not Hope",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = CorpusError;

    /// Accepts "Hope" / "Not Hope" in any case and the canonical indices
    /// "0" / "1".
    fn from_str(s: &str) -> Result<Label> {
        let trimmed = s.trim();
        match trimmed.to_lowercase().as_str() {
            "hope" | "0" => Ok(Label::Hope),
            "not hope" | "1" => Ok(Label::NotHope),
            _ => Err(CorpusError::BadLabel(trimmed.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub split: Split,
    pub documents: Vec<Document>,
    /// 1-based row numbers whose text field was empty in the source.
    pub empty_rows: Vec<usize>,
}

impl Dataset {
    pub fn new(split: Split, documents: Vec<Document>) -> Self {
        let empty_rows = documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.text.is_empty())
            .map(|(i, _)| i + 1)
            .collect();
        Dataset {
            split,
            documents,
            empty_rows,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.documents.iter().all(|d| d.label.is_some())
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.text.as_str())
    }

    /// Labels of every document, or an error naming the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.documents
            .iter()
            .map(|d| d.label.ok_or_else(|| CorpusError::Unlabeled(d.id.clone())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub hope: usize,
    pub not_hope: usize,
    pub total: usize,
}

impl ClassCounts {
    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Hope => self.hope,
            Label::NotHope => self.not_hope,
        }
    }
}

impl fmt::Display for ClassCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Hope\t{}", self.hope)?;
        writeln!(f, "NotHope\t{}", self.not_hope)?;
        write!(f, "Total\t{}", self.total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Tsv,
    Jsonl,
}

impl Format {
    /// Guess from a file extension; `.jsonl`/`.ndjson`, `.tsv`, else CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::Jsonl,
            Some("tsv") => Format::Tsv,
            _ => Format::Csv,
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            Format::Tsv => b'\t',
            _ => b',',
        }
    }
}

impl FromStr for Format {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Format> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            "jsonl" | "line-records" => Ok(Format::Jsonl),
            other => Err(CorpusError::BadFormat(other.to_string())),
        }
    }
}

/// Which columns (or JSON keys) hold the id, text and label.
///
/// A missing id column is fine (ids become `<split>-<row index>`); a missing
/// label column yields unlabeled documents, which only the test split allows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub text_column: String,
    pub label_column: Option<String>,
    pub id_column: Option<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            text_column: "text".into(),
            label_column: Some("label".into()),
            id_column: Some("id".into()),
        }
    }
}

struct RawRow {
    id: Option<String>,
    text: String,
    label: Option<String>,
}

pub fn load_dataset(path: &Path, format: Format, schema: &Schema, split: Split) -> Result<Dataset> {
    read_dataset(File::open(path)?, format, schema, split)
}

/// Reader-based variant of [`load_dataset`].
pub fn read_dataset<R: Read>(reader: R, format: Format, schema: &Schema, split: Split) -> Result<Dataset> {
    let rows = match format {
        Format::Csv | Format::Tsv => read_delimited(reader, format.delimiter(), schema)?,
        Format::Jsonl => read_json_lines(reader, schema)?,
    };

    let mut seen = HashSet::with_capacity(rows.len());
    let mut documents = Vec::with_capacity(rows.len());
    for (index, raw) in rows.into_iter().enumerate() {
        let row = index + 1;
        let label = match raw.label.as_deref() {
            None => None,
            Some(value) if value.trim().is_empty() => None,
            Some(value) => Some(value.parse::<Label>().map_err(|_| CorpusError::UnknownLabel {
                row,
                value: value.to_string(),
            })?),
        };
        if label.is_none() && split != Split::Test {
            return Err(CorpusError::MissingLabel { row, split });
        }
        let id = raw.id.unwrap_or_else(|| format!("{}-{}", split, index));
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        documents.push(Document {
            id,
            text: raw.text,
            label,
        });
    }
    Ok(Dataset::new(split, documents))
}

fn read_delimited<R: Read>(reader: R, delimiter: u8, schema: &Schema) -> Result<Vec<RawRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_error(e, 0)),
    };
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let text_idx = find(&schema.text_column).ok_or_else(|| CorpusError::MissingColumn(schema.text_column.clone()))?;
    let label_idx = schema.label_column.as_deref().and_then(find);
    let id_idx = schema.id_column.as_deref().and_then(find);

    let mut rows = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let row = index + 1;
        let record = record.map_err(|e| csv_error(e, row))?;
        if record.len() != headers.len() {
            return Err(CorpusError::MalformedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        rows.push(RawRow {
            id: id_idx.map(|i| record[i].to_string()),
            text: record[text_idx].to_string(),
            label: label_idx.map(|i| record[i].to_string()),
        });
    }
    Ok(rows)
}

fn csv_error(e: csv::Error, row: usize) -> CorpusError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CorpusError::Io(io),
        other => CorpusError::Parse {
            row,
            message: format!("{:?}", other),
        },
    }
}

fn read_json_lines<R: Read>(reader: R, schema: &Schema) -> Result<Vec<RawRow>> {
    let mut rows = Vec::new();
    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let row = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            row,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| CorpusError::Parse {
            row,
            message: "expected a JSON object".into(),
        })?;
        let text = match obj.get(&schema.text_column) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Null) | None => {
                return Err(CorpusError::Parse {
                    row,
                    message: format!("missing key {:?}", schema.text_column),
                })
            }
            Some(other) => other.to_string(),
        };
        let scalar = |key: &Option<String>| -> Option<String> {
            match key.as_ref().and_then(|k| obj.get(k)) {
                None | Some(serde_json::Value::Null) => None,
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                Some(other) => Some(other.to_string()),
            }
        };
        rows.push(RawRow {
            id: scalar(&schema.id_column),
            text,
            label: scalar(&schema.label_column),
        });
    }
    Ok(rows)
}

/// Write `dataset` with columns id, text and (when any document is labeled)
/// label, named after `schema`.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W, format: Format, schema: &Schema) -> Result<()> {
    let labeled = dataset.documents.iter().any(|d| d.label.is_some());
    let id_col = schema.id_column.clone().unwrap_or_else(|| "id".into());
    let label_col = schema.label_column.clone().unwrap_or_else(|| "label".into());
    match format {
        Format::Csv | Format::Tsv => {
            let mut w = csv::WriterBuilder::new()
                .delimiter(format.delimiter())
                .from_writer(writer);
            let mut header = vec![id_col.as_str(), schema.text_column.as_str()];
            if labeled {
                header.push(label_col.as_str());
            }
            w.write_record(&header).map_err(|e| csv_error(e, 0))?;
            for (i, d) in dataset.documents.iter().enumerate() {
                let mut rec = vec![d.id.as_str(), d.text.as_str()];
                if labeled {
                    rec.push(d.label.map(Label::as_str).unwrap_or(""));
                }
                w.write_record(&rec).map_err(|e| csv_error(e, i + 1))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = io::BufWriter::new(writer);
            for d in &dataset.documents {
                let mut obj = serde_json::Map::new();
                obj.insert(id_col.clone(), d.id.clone().into());
                obj.insert(schema.text_column.clone(), d.text.clone().into());
                if let Some(label) = d.label {
                    obj.insert(label_col.clone(), label.as_str().into());
                }
                writeln!(w, "{}", serde_json::Value::Object(obj))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Exact per-class counts; every document must carry a label.
pub fn stats(dataset: &Dataset) -> Result<ClassCounts> {
    let mut counts = ClassCounts::default();
    for doc in &dataset.documents {
        match doc.label {
            Some(Label::Hope) => counts.hope += 1,
            Some(Label::NotHope) => counts.not_hope += 1,
            None => return Err(CorpusError::Unlabeled(doc.id.clone())),
        }
        counts.total += 1;
    }
    Ok(counts)
}

/// A text found in two different splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub normalized_text: String,
    pub splits: (Split, Split),
}

/// Lowercase and collapse whitespace runs to single spaces.
pub fn normalize_for_dedup(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Report every (text, split pair) shared between two splits, ordered by
/// split pair then text. An empty result means the splits are disjoint.
pub fn check_split_integrity(train: &Dataset, dev: &Dataset, test: &Dataset) -> Vec<Collision> {
    let sets: Vec<(Split, HashSet<String>)> = [train, dev, test]
        .iter()
        .map(|d| (d.split, d.texts().map(normalize_for_dedup).collect()))
        .collect();

    let mut out = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let shared: BTreeMap<&String, ()> = sets[a]
                .1
                .iter()
                .filter(|t| sets[b].1.contains(*t))
                .map(|t| (t, ()))
                .collect();
            out.extend(shared.into_keys().map(|t| Collision {
                normalized_text: t.clone(),
                splits: (sets[a].0, sets[b].0),
            }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str, split: Split) -> Result<Dataset> {
        read_dataset(text.as_bytes(), Format::Csv, &Schema::default(), split)
    }

    #[test]
    fn two_rows_with_prose_labels() {
        let ds = csv("text,label\nfirst,Hope\nsecond,Not Hope\n", Split::Train).unwrap();
        let labels: Vec<_> = ds.documents.iter().map(|d| d.label.unwrap()).collect();
        assert_eq!(labels, vec![Label::Hope, Label::NotHope]);
        assert_eq!(ds.documents[0].id, "train-0");
        assert_eq!(ds.documents[1].id, "train-1");
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let ds = csv("", Split::Train).unwrap();
        assert!(ds.is_empty());
        let ds = read_dataset(&b""[..], Format::Jsonl, &Schema::default(), Split::Dev).unwrap();
        assert!(ds.is_empty());
        let ds = csv("text,label\n", Split::Train).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn unknown_label_names_row_and_value() {
        let err = csv("text,label\nok,Hope\nhmm,maybe\n", Split::Train).unwrap_err();
        match err {
            CorpusError::UnknownLabel { row, value } => {
                assert_eq!(row, 2);
                assert_eq!(value, "maybe");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_string("text,label\nhmm,maybe\n").contains("maybe"));
    }

    fn err_string(text: &str) -> String {
        csv(text, Split::Train).unwrap_err().to_string()
    }

    #[test]
    fn wrong_column_count_reports_row() {
        let err = csv("text,label\na,Hope\nb,Hope,extra\n", Split::Train).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { row: 2, expected: 2, found: 3 }));
    }

    #[test]
    fn label_parsing_variants() {
        for s in ["Hope", "hope", " HOPE ", "0"] {
            assert_eq!(s.parse::<Label>().unwrap(), Label::Hope);
        }
        for s in ["Not Hope", "not hope", "NOT HOPE", "1"] {
            assert_eq!(s.parse::<Label>().unwrap(), Label::NotHope);
        }
        assert!("2".parse::<Label>().is_err());
        assert!("nothope".parse::<Label>().is_err());
    }

    #[test]
    fn unlabeled_only_allowed_for_test() {
        assert!(matches!(
            csv("text\nabc\n", Split::Dev),
            Err(CorpusError::MissingLabel { row: 1, .. })
        ));
        let test = csv("text\nabc\n", Split::Test).unwrap();
        assert_eq!(test.documents[0].label, None);
        assert!(stats(&test).is_err());
    }

    #[test]
    fn tsv_and_jsonl_and_ids() {
        let ds = read_dataset(
            "id\ttext\tlabel\na1\tsome text\tHope\na2\tmore\t1\n".as_bytes(),
            Format::Tsv,
            &Schema::default(),
            Split::Train,
        )
        .unwrap();
        assert_eq!(ds.documents[1].id, "a2");
        assert_eq!(ds.documents[1].label, Some(Label::NotHope));

        let ds = read_dataset(
            "{\"text\": \"x y\", \"label\": \"Hope\"}\n\n{\"text\": \"z\", \"label\": 1}\n".as_bytes(),
            Format::Jsonl,
            &Schema::default(),
            Split::Train,
        )
        .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.documents[1].label, Some(Label::NotHope));
        assert_eq!(ds.documents[1].id, "train-1");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = csv("id,text,label\na,x,Hope\na,y,Hope\n", Split::Train).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(id) if id == "a"));
    }

    #[test]
    fn empty_text_rows_are_flagged() {
        let ds = csv("text,label\n,Hope\nabc,Hope\n", Split::Train).unwrap();
        assert_eq!(ds.empty_rows, vec![1]);
    }

    #[test]
    fn stats_counts_and_empty() {
        let ds = csv("text,label\na,Hope\nb,Hope\nc,Not Hope\n", Split::Train).unwrap();
        assert_eq!(
            stats(&ds).unwrap(),
            ClassCounts {
                hope: 2,
                not_hope: 1,
                total: 3
            }
        );
        assert_eq!(stats(&Dataset::new(Split::Train, vec![])).unwrap(), ClassCounts::default());
    }

    fn ds(split: Split, texts: &[&str]) -> Dataset {
        Dataset::new(
            split,
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document {
                    id: format!("{split}-{i}"),
                    text: t.to_string(),
                    label: Some(Label::Hope),
                })
                .collect(),
        )
    }

    #[test]
    fn split_integrity() {
        let train = ds(Split::Train, &["a b", "c", "d"]);
        let dev = ds(Split::Dev, &["e", "f"]);
        let test = ds(Split::Test, &["g"]);
        assert!(check_split_integrity(&train, &dev, &test).is_empty());

        let dev = ds(Split::Dev, &["A   b", "f"]);
        let report = check_split_integrity(&train, &dev, &test);
        assert_eq!(
            report,
            vec![Collision {
                normalized_text: "a b".into(),
                splits: (Split::Train, Split::Dev)
            }]
        );
    }

    #[test]
    fn split_integrity_matches_pairwise_brute_force() {
        let train = ds(Split::Train, &["one", "two", "three", "four", "two"]);
        let dev = ds(Split::Dev, &["Two", "five", "THREE"]);
        let test = ds(Split::Test, &["six", "one  "]);
        let report = check_split_integrity(&train, &dev, &test);

        let mut brute = Vec::new();
        let all = [&train, &dev, &test];
        for a in 0..3 {
            for b in a + 1..3 {
                let mut hits = Vec::new();
                for x in &all[a].documents {
                    for y in &all[b].documents {
                        let (nx, ny) = (normalize_for_dedup(&x.text), normalize_for_dedup(&y.text));
                        if nx == ny && !hits.contains(&nx) {
                            hits.push(nx);
                        }
                    }
                }
                hits.sort();
                for h in hits {
                    brute.push((h, all[a].split, all[b].split));
                }
            }
        }
        assert_eq!(brute.len(), 3);
        let got: Vec<_> = report
            .into_iter()
            .map(|c| (c.normalized_text, c.splits.0, c.splits.1))
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn write_then_read_preserves_documents() {
        let ds = csv("id,text,label\na,\"hello, world\",Hope\nb,bye,Not Hope\n", Split::Train).unwrap();
        for format in [Format::Csv, Format::Tsv, Format::Jsonl] {
            let mut buf = Vec::new();
            write_dataset(&ds, &mut buf, format, &Schema::default()).unwrap();
            let back = read_dataset(&buf[..], format, &Schema::default(), Split::Train).unwrap();
            assert_eq!(back, ds);
        }
    }
}
