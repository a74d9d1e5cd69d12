//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always shown; exits non-zero if any fail.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hopeclf::corpus::{Dataset, Label};
use hopeclf::features::{NGramConfig, SparseMatrix, SparseVector, TfidfModel, VectorizerKind, Vocabulary};
use hopeclf::harness::{self, GridSpec};
use hopeclf::metrics::{evaluate, table_row, Averages, ConfusionMatrix, EvalReport};
use hopeclf::models::{
    logreg_gradient, train_logreg, train_nb, train_svm, KernelConfig, LogRegParams, ModelKind, SvmParams,
};
use hopeclf::synthetic::{generate, SyntheticConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(
        elapsed.as_secs_f64() < limit_s,
        format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn vectorizer_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let corpora = 60;
    for k in 0..corpora {
        let docs = loop {
            let d = random_corpus(&mut rng, 10, 20);
            if d.iter().any(|s| !oracle_tokens(s).is_empty()) {
                break d;
            }
        };
        let min_n = rng.gen_range(1..=3);
        let max_n = rng.gen_range(min_n..=3);
        let min_df = if k % 3 == 0 { 2 } else { 1 };
        let max_features = if k % 4 == 0 { Some(rng.gen_range(1..=15)) } else { None };
        let oracle = oracle_vectorize(&docs, min_n, max_n, min_df, max_features);
        let config = NGramConfig {
            min_n,
            max_n,
            min_df,
            max_features,
            ..NGramConfig::default()
        };
        let vocab = match Vocabulary::fit(&docs, &config) {
            Ok(v) => v,
            Err(_) if oracle.terms.is_empty() => continue,
            Err(e) => return Err(format!("corpus {k}: fit failed: {e}")),
        };
        check(vocab.terms() == oracle.terms.as_slice(), format!("corpus {k}: vocabulary differs"))?;
        let counts = vocab.count_matrix(&docs);
        let tfidf = TfidfModel::fit(&counts);
        worst = worst.max(max_abs_diff(tfidf.idf(), &oracle.idf));
        let weighted = tfidf.transform_matrix(&counts).map_err(|e| e.to_string())?;
        for i in 0..docs.len() {
            worst = worst.max(max_abs_diff(&dense(counts.row(i), vocab.len()), &oracle.counts[i]));
            worst = worst.max(max_abs_diff(&dense(weighted.row(i), vocab.len()), &oracle.tfidf[i]));
        }
    }
    check(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("{corpora} corpora, max deviation {worst:.1e}, {:.2}s", start.elapsed().as_secs_f64()))
}

fn tfidf_fixture() -> Outcome {
    let docs = ["hope wins", "hope fails"];
    let config = NGramConfig::with_range(1, 1);
    let vocab = Vocabulary::fit(&docs, &config).map_err(|e| e.to_string())?;
    let counts = vocab.count_matrix(&docs);
    let model = TfidfModel::fit(&counts);
    let other = 1.5f64.ln() + 1.0;
    let expected_idf: BTreeMap<&str, f64> = [("fails", other), ("hope", 1.0), ("wins", other)].into();
    for (term, want) in &expected_idf {
        let j = vocab.get(term).ok_or(format!("missing term {term}"))?;
        check((model.idf()[j] - want).abs() <= 1e-9, format!("idf[{term}] = {}", model.idf()[j]))?;
    }
    // independent arithmetic: doc 1 is (hope: 1, wins: ln 1.5 + 1), normalized
    let norm = (1.0 + other * other).sqrt();
    let x = model.transform(counts.row(0)).map_err(|e| e.to_string())?;
    check((x.get(vocab.get("hope").unwrap()) - 1.0 / norm).abs() <= 1e-9, "hope weight")?;
    check((x.get(vocab.get("wins").unwrap()) - other / norm).abs() <= 1e-9, "wins weight")?;
    check((x.norm_squared().sqrt() - 1.0).abs() <= 1e-9, "unit norm")?;
    Ok(format!("idf(others) = {other:.6}, doc vector [{:.5}, {:.5}]", 1.0 / norm, other / norm))
}

fn nb_closed_form() -> Outcome {
    let docs = ["hope good", "hope rise", "sad bad"];
    let y = [Label::Hope, Label::Hope, Label::NotHope];
    let vocab = Vocabulary::fit(&docs, &NGramConfig::with_range(1, 1)).map_err(|e| e.to_string())?;
    let nb = train_nb(&vocab.count_matrix(&docs), &y, 1.0).map_err(|e| e.to_string())?;
    let (label, post) = nb.predict(&vocab.count_text("hope")).map_err(|e| e.to_string())?;
    let want = 14.0 / 17.0;
    check(label == Label::Hope, "argmax should be Hope")?;
    check((post[0] - want).abs() <= 1e-12, format!("P(Hope|hope) = {}", post[0]))?;
    Ok(format!("P(Hope|\"hope\") = {:.15} (14/17 = {want:.15})", post[0]))
}

fn lr_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = rng.gen_range(4..20);
        let d = rng.gen_range(1..8);
        let (x, y) = random_instance(&mut rng, n, d);
        let c = [0.1, 1.0, 10.0][k % 3];
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let xs = SparseMatrix::from_dense(&x);
        let (gw, gb) = logreg_gradient(&xs, &y, &w, b, c);

        let mut analytic = gw.clone();
        analytic.push(gb);
        let mut numeric = Vec::with_capacity(d + 1);
        for j in 0..=d {
            let shifted = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < d {
                    w2[j] += delta;
                } else {
                    b2 += delta;
                }
                oracle_logreg_objective(&x, &y, &w2, b2, c)
            };
            numeric.push((shifted(h) - shifted(-h)) / (2.0 * h));
        }
        let diff = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = diff / scale(&analytic).max(scale(&numeric)).max(1e-12);
        worst = worst.max(rel);

        let (_, report) = train_logreg(&xs, &y, &LogRegParams { c, ..Default::default() }).map_err(|e| e.to_string())?;
        for pair in report.objective_trace.windows(2) {
            check(pair[1] <= pair[0], format!("instance {k}: objective rose {} -> {}", pair[0], pair[1]))?;
        }
    }
    check(worst < 1e-5, format!("max relative error {worst:e}"))?;
    Ok(format!("20 instances, max relative error {worst:.1e}, objective monotone"))
}

fn svm_correctness() -> Outcome {
    let start = Instant::now();
    let linear_params = SvmParams {
        kernel: KernelConfig::linear(),
        ..SvmParams::default()
    };

    // two symmetric points
    let x = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![-1.0, 0.0]]);
    let y = [Label::Hope, Label::NotHope];
    let (svm, report) = train_svm(&x, &y, &linear_params).map_err(|e| e.to_string())?;
    let lin = svm.to_linear().map_err(|e| e.to_string())?;
    check(
        (lin.weights[0] - 1.0).abs() <= 1e-6 && lin.weights[1].abs() <= 1e-6 && lin.bias.abs() <= 1e-6,
        format!("w = {:?}, b = {}", lin.weights, lin.bias),
    )?;
    check(
        report.alpha.iter().all(|a| (a - 0.5).abs() <= 1e-6),
        format!("alpha = {:?}", report.alpha),
    )?;

    // KKT on random instances, kernels and C values
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_kkt: f64 = 0.0;
    let mut worst_primal: f64 = 0.0;
    let mut worst_balance: f64 = 0.0;
    for k in 0..20 {
        let n = rng.gen_range(8..40);
        let d = rng.gen_range(2..6);
        let (xd, yd) = random_instance(&mut rng, n, d);
        let xs = SparseMatrix::from_dense(&xd);
        let c = [0.5, 1.0, 10.0][k % 3];
        let rbf_kernel = k % 2 == 1;
        let params = SvmParams {
            c,
            kernel: if rbf_kernel { KernelConfig::rbf(None) } else { KernelConfig::linear() },
            tol: 1e-3,
            ..SvmParams::default()
        };
        let (model, rep) = train_svm(&xs, &yd, &params).map_err(|e| format!("instance {k}: {e}"))?;
        let v = if rbf_kernel {
            let g = model.gamma;
            kkt_violation(&xd, &yd, &rep.alpha, model.bias, c, |a, b| rbf(a, b, g))
        } else {
            kkt_violation(&xd, &yd, &rep.alpha, model.bias, c, linear)
        };
        worst_kkt = worst_kkt.max(v);
        let balance: f64 = rep.alpha.iter().zip(&yd).map(|(a, l)| a * l.sign()).sum();
        worst_balance = worst_balance.max(balance.abs());

        if !rbf_kernel {
            let primal = model.to_linear().map_err(|e| e.to_string())?;
            for _ in 0..10 {
                let q: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let q = SparseVector::from_dense(&q);
                let a = model.decision_function(&q).map_err(|e| e.to_string())?;
                let b = primal.decision_function(&q).map_err(|e| e.to_string())?;
                worst_primal = worst_primal.max((a - b).abs());
            }
        }
    }
    check(worst_kkt <= 1e-3, format!("KKT violation {worst_kkt:e}"))?;
    check(worst_primal <= 1e-9, format!("dual/primal gap {worst_primal:e}"))?;
    check(worst_balance <= 1e-9, format!("sum alpha*y = {worst_balance:e}"))?;

    // XOR
    let xor = SparseMatrix::from_dense(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    let yx = [Label::Hope, Label::Hope, Label::NotHope, Label::NotHope];
    let (rbf_model, _) = train_svm(
        &xor,
        &yx,
        &SvmParams {
            c: 10.0,
            kernel: KernelConfig::rbf(Some(1.0)),
            ..SvmParams::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let correct = xor
        .rows()
        .iter()
        .zip(&yx)
        .filter(|(r, l)| rbf_model.predict(r).ok() == Some(**l))
        .count();
    check(correct == 4, format!("XOR training accuracy {correct}/4"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "two-point exact, KKT max {worst_kkt:.1e}, dual/primal {worst_primal:.1e}, XOR 4/4, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn metrics_fixtures() -> Outcome {
    use Label::*;
    // gold Hope: 3 right, 1 wrong; gold NotHope: 2 wrong, 4 right
    let gold = [Hope, Hope, Hope, Hope, NotHope, NotHope, NotHope, NotHope, NotHope, NotHope];
    let pred = [Hope, Hope, Hope, NotHope, Hope, Hope, NotHope, NotHope, NotHope, NotHope];
    let r = evaluate(&gold, &pred).map_err(|e| e.to_string())?;
    let (macro_f1, weighted_f1, acc) = oracle_f1(3.0, 1.0, 2.0, 4.0);
    check((r.macro_f1() - 0.6970).abs() <= 5e-5, format!("macro-F1 {}", r.macro_f1()))?;
    check((r.macro_f1() - macro_f1).abs() <= 1e-12, "macro-F1 disagrees with oracle")?;
    check((r.weighted_avg.f1 - weighted_f1).abs() <= 1e-12, "weighted-F1 disagrees with oracle")?;
    check((r.accuracy - acc).abs() <= 1e-12, "accuracy disagrees with oracle")?;

    let perfect = evaluate(&gold, &gold).map_err(|e| e.to_string())?;
    let all_one = [
        perfect.macro_avg.precision,
        perfect.macro_avg.recall,
        perfect.macro_avg.f1,
        perfect.weighted_avg.precision,
        perfect.weighted_avg.recall,
        perfect.weighted_avg.f1,
        perfect.accuracy,
    ]
    .iter()
    .chain(Label::ALL.iter().flat_map(|l| {
        let m = perfect.class(*l);
        [m.precision, m.recall, m.f1]
    }).collect::<Vec<_>>().iter())
    .all(|v| *v == 1.0);
    check(all_one, "perfect predictions should give 1.0 everywhere")?;

    let bg = [Hope, Hope, Hope, NotHope, NotHope, NotHope];
    let bp = [Hope, NotHope, Hope, NotHope, Hope, Hope];
    let b = evaluate(&bg, &bp).map_err(|e| e.to_string())?;
    let gap = [
        (b.macro_avg.precision - b.weighted_avg.precision).abs(),
        (b.macro_avg.recall - b.weighted_avg.recall).abs(),
        (b.macro_avg.f1 - b.weighted_avg.f1).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    check(gap <= 1e-12, format!("balanced macro/weighted gap {gap:e}"))?;
    Ok(format!("macro-F1 {:.4}, perfect all 1.0, balanced gap {gap:.0e}", r.macro_f1()))
}

fn synthetic_grid() -> Outcome {
    let start = Instant::now();
    let corpus = generate(&SyntheticConfig::default());
    let spec = GridSpec::default();
    let cells = harness::run_grid(&spec, &corpus.train, &corpus.dev).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(cells.len() == 8, format!("{} rows", cells.len()))?;
    let target = cells
        .iter()
        .find(|c| c.row.model == ModelKind::SvmLinear && c.row.vectorizer == VectorizerKind::Tfidf)
        .ok_or("no svm-linear + tfidf row")?;
    let f1 = target
        .row
        .dev_macro_f1()
        .ok_or_else(|| format!("svm-linear + tfidf failed: {:?}", target.row.error))?;
    check(f1 >= 0.95, format!("svm-linear + tfidf dev macro-F1 {f1:.4}"))?;
    within(elapsed, 60.0)?;
    Ok(format!(
        "svm-linear + tfidf dev macro-F1 {f1:.4}, 8-cell grid in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn relabel_split(ds: &Dataset, split: hopeclf::corpus::Split) -> Dataset {
    let mut docs = ds.documents.clone();
    for (i, d) in docs.iter_mut().enumerate() {
        d.id = format!("{}-{i}", split.as_str());
    }
    Dataset::new(split, docs)
}

fn no_leakage_and_determinism() -> Outcome {
    use hopeclf::corpus::Split;
    let a = generate(&SyntheticConfig::default());
    let other = generate(&SyntheticConfig {
        seed: 99,
        ..SyntheticConfig::default()
    });
    let spec = GridSpec {
        ngram: NGramConfig::with_range(1, 3),
        jobs: 2,
        ..GridSpec::default()
    };
    let run = |dev: &Dataset, test: &Dataset| harness::run_experiment_on(&spec, 7, &a.train, dev, Some(test));
    let first = run(&a.dev, &a.test).map_err(|e| e.to_string())?;
    let swapped = run(
        &relabel_split(&other.dev, Split::Dev),
        &relabel_split(&other.test, Split::Test),
    )
    .map_err(|e| e.to_string())?;

    let hashes = |o: &harness::ExperimentOutcome| -> BTreeMap<(&'static str, &'static str), String> {
        o.cells
            .iter()
            .filter_map(|c| c.bundle.as_ref().map(|b| (c.row.key(), b.checksum())))
            .collect()
    };
    let (h1, h2) = (hashes(&first), hashes(&swapped));
    check(h1.len() == 8, format!("{} bundles", h1.len()))?;
    check(h1 == h2, "fitted artifacts changed when dev/test were replaced")?;

    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut listings = Vec::new();
    for dir in &dirs {
        let outcome = run(&a.dev, &a.test).map_err(|e| e.to_string())?;
        let written = harness::write_artifacts(&outcome, dir.path()).map_err(|e| e.to_string())?;
        let mut files = BTreeMap::new();
        for path in written {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if name != harness::TIMINGS {
                files.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
        listings.push(files);
    }
    for need in [harness::BEST_BUNDLE, harness::LEADERBOARD_MACHINE, harness::LEADERBOARD_TABLE, harness::PREDICTIONS] {
        check(listings[0].contains_key(need), format!("missing artifact {need}"))?;
    }
    for (name, bytes) in &listings[0] {
        check(listings[1].get(name) == Some(bytes), format!("{name} differs between runs"))?;
    }
    Ok(format!(
        "8 bundle hashes stable under dev/test swap; {} artifacts byte-identical across runs",
        listings[0].len()
    ))
}

fn report_shape() -> Outcome {
    let mut r = EvalReport::from_confusion(ConfusionMatrix([[1, 0], [0, 1]]));
    r.weighted_avg = Averages {
        precision: 0.82,
        recall: 0.80,
        f1: 0.79,
    };
    r.macro_avg = Averages {
        precision: 0.82,
        recall: 0.80,
        f1: 0.79,
    };
    r.accuracy = 0.80;
    let row = table_row(&r);
    let want = "0.82\t0.80\t0.79\t0.82\t0.80\t0.79\t0.80";
    check(row == want, format!("row {row:?}"))?;
    let full = hopeclf::metrics::format_report(&r, hopeclf::metrics::ReportStyle::Table);
    check(full.lines().nth(1) == Some(want), "format_report row differs")?;
    Ok(format!("{row:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("vectorizer oracle equivalence", vectorizer_oracle),
        ("tf-idf closed-form fixture", tfidf_fixture),
        ("naive Bayes closed form", nb_closed_form),
        ("logistic regression gradient check", lr_gradient),
        ("SVM correctness", svm_correctness),
        ("metrics fixtures", metrics_fixtures),
        ("end-to-end synthetic grid", synthetic_grid),
        ("no-leakage and determinism", no_leakage_and_determinism),
        ("report-shape conformance", report_shape),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
