//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's feature or model code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hopeclf::corpus::Label;
use hopeclf::features::SparseVector;
use rand::Rng;

/// Alphanumeric runs of two or more characters.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() {
            cur.push(c);
        } else {
            if cur.chars().count() >= 2 {
                out.push(cur.clone());
            }
            cur.clear();
        }
    }
    out
}

pub struct OracleFeatures {
    pub terms: Vec<String>,
    pub counts: Vec<Vec<f64>>,
    pub tfidf: Vec<Vec<f64>>,
    pub idf: Vec<f64>,
}

/// Brute-force n-gram counting with dense vectors.
pub fn oracle_vectorize(
    docs: &[String],
    min_n: usize,
    max_n: usize,
    min_df: usize,
    max_features: Option<usize>,
) -> OracleFeatures {
    let grams: Vec<Vec<String>> = docs
        .iter()
        .map(|d| {
            let toks = oracle_tokens(d);
            let mut g = Vec::new();
            for start in 0..toks.len() {
                for n in min_n..=max_n {
                    if start + n <= toks.len() {
                        g.push(toks[start..start + n].join(" "));
                    }
                }
            }
            g
        })
        .collect();

    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut total: BTreeMap<String, usize> = BTreeMap::new();
    for g in &grams {
        let distinct: BTreeSet<&String> = g.iter().collect();
        for t in distinct {
            *df.entry(t.clone()).or_default() += 1;
        }
        for t in g {
            *total.entry(t.clone()).or_default() += 1;
        }
    }
    let mut kept: Vec<String> = df.iter().filter(|(_, &d)| d >= min_df).map(|(t, _)| t.clone()).collect();
    if let Some(k) = max_features {
        kept.sort_by(|a, b| total[b].cmp(&total[a]).then(a.cmp(b)));
        kept.truncate(k);
        kept.sort();
    }

    let n_docs = docs.len() as f64;
    let idf: Vec<f64> = kept
        .iter()
        .map(|t| ((1.0 + n_docs) / (1.0 + df[t] as f64)).ln() + 1.0)
        .collect();
    let counts: Vec<Vec<f64>> = grams
        .iter()
        .map(|g| {
            kept.iter()
                .map(|t| g.iter().filter(|x| *x == t).count() as f64)
                .collect()
        })
        .collect();
    let tfidf = counts
        .iter()
        .map(|row| {
            let w: Vec<f64> = row.iter().zip(&idf).map(|(c, i)| c * i).collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                w
            } else {
                w.iter().map(|v| v / norm).collect()
            }
        })
        .collect();
    OracleFeatures {
        terms: kept,
        counts,
        tfidf,
        idf,
    }
}

pub fn dense(v: &SparseVector, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (i, x) in v.iter() {
        out[i] = x;
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Random corpus over a small word pool so n-grams repeat.
pub fn random_corpus<R: Rng>(rng: &mut R, max_docs: usize, max_tokens: usize) -> Vec<String> {
    const POOL: &[&str] = &[
        "hope", "we", "rise", "dark", "light", "go", "on", "ok", "sad", "joy", "new", "day", "x1", "ab", "zz",
        "run", "far", "up", "no", "yes",
    ];
    let n_docs = rng.gen_range(1..=max_docs);
    (0..n_docs)
        .map(|_| {
            let n = rng.gen_range(0..=max_tokens);
            (0..n).map(|_| POOL[rng.gen_range(0..POOL.len())]).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

/// Logistic objective `1/2 |w|^2 + C sum ln(1 + exp(-y (w.x + b)))` on
/// dense rows, evaluated directly.
pub fn oracle_logreg_objective(x: &[Vec<f64>], y: &[Label], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(row, l)| {
            let m = l.sign() * (row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b);
            (1.0 + (-m).exp()).ln()
        })
        .sum();
    reg + c * loss
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

pub fn linear(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest violation of the soft-margin KKT conditions given the dual
/// variables, the bias and a kernel.
pub fn kkt_violation<K: Fn(&[f64], &[f64]) -> f64>(
    x: &[Vec<f64>],
    y: &[Label],
    alpha: &[f64],
    bias: f64,
    c: f64,
    kernel: K,
) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let f: f64 = (0..x.len())
            .map(|j| alpha[j] * y[j].sign() * kernel(&x[j], &x[i]))
            .sum::<f64>()
            + bias;
        let margin = y[i].sign() * f;
        let eps = 1e-9 * c;
        let v = if alpha[i] <= eps {
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= c - eps {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Random dense instance with both classes present.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<Label>) {
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-2.0..2.0) })
                .collect()
        })
        .collect();
    let mut y: Vec<Label> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Label::Hope } else { Label::NotHope })
        .collect();
    y[0] = Label::Hope;
    y[1] = Label::NotHope;
    (x, y)
}

/// Precision, recall and F1 for both classes straight from the counts,
/// returned as (macro F1, weighted F1, accuracy).
pub fn oracle_f1(tp_hope: f64, fn_hope: f64, fp_hope: f64, tn_hope: f64) -> (f64, f64, f64) {
    let f1 = |tp: f64, fp: f64, fnn: f64| {
        let p = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let r = if tp + fnn == 0.0 { 0.0 } else { tp / (tp + fnn) };
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    };
    let f_h = f1(tp_hope, fp_hope, fn_hope);
    let f_n = f1(tn_hope, fn_hope, fp_hope);
    let s_h = tp_hope + fn_hope;
    let s_n = tn_hope + fp_hope;
    let total = s_h + s_n;
    ((f_h + f_n) / 2.0, (f_h * s_h + f_n * s_n) / total, (tp_hope + tn_hope) / total)
}
