//! Precision, recall and F1 per class, macro- and support-weighted,
//! plus accuracy and the confusion matrix.
//!
//! Zero denominators give 0 and raise [`EvalReport::zero_division`].
//! Values are kept at full precision; rounding happens only in
//! [`format_report`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("gold has {gold} labels but predictions have {predicted}")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("cannot evaluate an empty prediction set")]
    Empty,
    #[error("report line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Counts indexed `[gold][predicted]` in canonical label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix(pub [[u64; 2]; 2]);

impl ConfusionMatrix {
    pub fn from_labels(gold: &[Label], predicted: &[Label]) -> Self {
        let mut m = [[0u64; 2]; 2];
        for (g, p) in gold.iter().zip(predicted) {
            m[g.index()][p.index()] += 1;
        }
        ConfusionMatrix(m)
    }

    pub fn get(&self, gold: Label, predicted: Label) -> u64 {
        self.0[gold.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().flatten().sum()
    }

    pub fn true_positives(&self, class: Label) -> u64 {
        self.get(class, class)
    }

    pub fn false_positives(&self, class: Label) -> u64 {
        let other = other(class);
        self.get(other, class)
    }

    pub fn false_negatives(&self, class: Label) -> u64 {
        let other = other(class);
        self.get(class, other)
    }

    pub fn support(&self, class: Label) -> u64 {
        self.0[class.index()].iter().sum()
    }
}

fn other(class: Label) -> Label {
    match class {
        Label::Hope => Label::NotHope,
        Label::NotHope => Label::Hope,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Indexed by [`Label::index`].
    pub per_class: [ClassMetrics; 2],
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub zero_division: bool,
}

impl EvalReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    pub fn macro_f1(&self) -> f64 {
        self.macro_avg.f1
    }

    /// Derives every metric from a confusion matrix. An empty matrix gives
    /// all zeros with the zero-division flag set.
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let mut zero_division = false;
        let mut per_class = [ClassMetrics::default(); 2];
        for label in Label::ALL {
            let mut ratio = |num: u64, den: u64| {
                if den == 0 {
                    zero_division = true;
                    0.0
                } else {
                    num as f64 / den as f64
                }
            };
            let tp = confusion.true_positives(label);
            let precision = ratio(tp, tp + confusion.false_positives(label));
            let recall = ratio(tp, tp + confusion.false_negatives(label));
            let f1 = if precision + recall == 0.0 {
                zero_division = true;
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            per_class[label.index()] = ClassMetrics {
                precision,
                recall,
                f1,
                support: confusion.support(label),
            };
        }

        let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / 2.0;
        let macro_avg = Averages {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        };
        let total = confusion.total();
        let weighted = |f: fn(&ClassMetrics) -> f64| {
            if total == 0 {
                0.0
            } else {
                per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64
            }
        };
        let weighted_avg = Averages {
            precision: weighted(|m| m.precision),
            recall: weighted(|m| m.recall),
            f1: weighted(|m| m.f1),
        };
        let correct = confusion.true_positives(Label::Hope) + confusion.true_positives(Label::NotHope);
        let accuracy = if total == 0 { 0.0 } else { correct as f64 / total as f64 };
        EvalReport {
            per_class,
            macro_avg,
            weighted_avg,
            accuracy,
            confusion,
            zero_division: zero_division || total == 0,
        }
    }
}

pub fn evaluate(gold: &[Label], predicted: &[Label]) -> Result<EvalReport, MetricsError> {
    if gold.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(EvalReport::from_confusion(ConfusionMatrix::from_labels(gold, predicted)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    /// Weighted P/R/F1, macro P/R/F1 and accuracy, two decimals, tab separated.
    Table,
    /// `key<TAB>value` lines, reals with 17 significant digits.
    Machine,
}

pub const TABLE_HEADER: &str =
    "Weighted Precision\tWeighted Recall\tWeighted F1\tMacro Precision\tMacro Recall\tMacro F1\tAcc";

/// The seven headline numbers in table column order, two decimals each.
pub fn table_row(report: &EvalReport) -> String {
    [
        report.weighted_avg.precision,
        report.weighted_avg.recall,
        report.weighted_avg.f1,
        report.macro_avg.precision,
        report.macro_avg.recall,
        report.macro_avg.f1,
        report.accuracy,
    ]
    .iter()
    .map(|v| format!("{v:.2}"))
    .collect::<Vec<_>>()
    .join("\t")
}

/// 17 significant digits: exact round trip for every f64.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_report(report: &EvalReport, style: ReportStyle) -> String {
    match style {
        ReportStyle::Table => format!("{TABLE_HEADER}\n{}\n", table_row(report)),
        ReportStyle::Machine => {
            let mut s = String::new();
            for (k, v) in machine_fields(report) {
                let _ = writeln!(s, "{k}\t{v}");
            }
            s
        }
    }
}

fn class_key(label: Label) -> &'static str {
    match label {
        Label::Hope => "hope",
        Label::NotHope => "not_hope",
    }
}

fn machine_fields(r: &EvalReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for label in Label::ALL {
        let m = r.class(label);
        let k = class_key(label);
        out.push((format!("{k}.precision"), format_real(m.precision)));
        out.push((format!("{k}.recall"), format_real(m.recall)));
        out.push((format!("{k}.f1"), format_real(m.f1)));
        out.push((format!("{k}.support"), m.support.to_string()));
    }
    for (prefix, avg) in [("macro", &r.macro_avg), ("weighted", &r.weighted_avg)] {
        out.push((format!("{prefix}.precision"), format_real(avg.precision)));
        out.push((format!("{prefix}.recall"), format_real(avg.recall)));
        out.push((format!("{prefix}.f1"), format_real(avg.f1)));
    }
    out.push(("accuracy".into(), format_real(r.accuracy)));
    for g in Label::ALL {
        for p in Label::ALL {
            out.push((
                format!("confusion.{}.{}", class_key(g), class_key(p)),
                r.confusion.get(g, p).to_string(),
            ));
        }
    }
    out.push(("zero_division".into(), r.zero_division.to_string()));
    out
}

/// Inverse of [`format_report`] with [`ReportStyle::Machine`].
pub fn parse_machine_report(text: &str) -> Result<EvalReport, MetricsError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('\t').ok_or(MetricsError::Parse {
            line: i + 1,
            message: "expected key<TAB>value".into(),
        })?;
        map.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| {
        map.get(k).ok_or(MetricsError::Parse {
            line: 0,
            message: format!("missing key {k:?}"),
        })
    };
    let real = |k: &str| -> Result<f64, MetricsError> {
        get(k)?.parse::<f64>().map_err(|_| MetricsError::Parse {
            line: 0,
            message: format!("{k}: not a number"),
        })
    };
    let int = |k: &str| -> Result<u64, MetricsError> {
        get(k)?.parse::<u64>().map_err(|_| MetricsError::Parse {
            line: 0,
            message: format!("{k}: not an integer"),
        })
    };

    let mut per_class = [ClassMetrics::default(); 2];
    for label in Label::ALL {
        let k = class_key(label);
        per_class[label.index()] = ClassMetrics {
            precision: real(&format!("{k}.precision"))?,
            recall: real(&format!("{k}.recall"))?,
            f1: real(&format!("{k}.f1"))?,
            support: int(&format!("{k}.support"))?,
        };
    }
    let avg = |prefix: &str| -> Result<Averages, MetricsError> {
        Ok(Averages {
            precision: real(&format!("{prefix}.precision"))?,
            recall: real(&format!("{prefix}.recall"))?,
            f1: real(&format!("{prefix}.f1"))?,
        })
    };
    let mut confusion = [[0u64; 2]; 2];
    for g in Label::ALL {
        for p in Label::ALL {
            confusion[g.index()][p.index()] = int(&format!("confusion.{}.{}", class_key(g), class_key(p)))?;
        }
    }
    let zero_division = match get("zero_division")?.as_str() {
        "true" => true,
        "false" => false,
        _ => {
            return Err(MetricsError::Parse {
                line: 0,
                message: "zero_division must be true or false".into(),
            })
        }
    };
    Ok(EvalReport {
        per_class,
        macro_avg: avg("macro")?,
        weighted_avg: avg("weighted")?,
        accuracy: real("accuracy")?,
        confusion: ConfusionMatrix(confusion),
        zero_division,
    })
}
