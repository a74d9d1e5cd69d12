//! Fit word n-gram vocabularies and look at count and TF-IDF vectors.

use hopeclf::features::{ngrams, tokenize, NGramConfig, Vectorizer, VectorizerKind};

fn main() {
    let docs = ["hope wins", "hope fails", "hope wins again and again"];

    let tokens = tokenize(docs[2]);
    println!("tokens: {tokens:?}");
    println!("1-2 grams: {:?}", ngrams(&tokens, &NGramConfig::with_range(1, 2)));

    let config = NGramConfig::with_range(1, 2);
    for kind in VectorizerKind::ALL {
        let v = Vectorizer::fit(&docs, &config, kind).expect("non-empty corpus");
        println!("\n{kind}: {} features", v.dim());
        for (i, term) in v.vocabulary.terms().iter().enumerate() {
            let idf = v.tfidf.as_ref().map(|t| format!("  idf {:.4}", t.idf()[i])).unwrap_or_default();
            println!("  {i:>2} {term}{idf}");
        }
        for d in &docs {
            let x = v.transform(d);
            let shown: Vec<String> = x.iter().map(|(j, w)| format!("{j}:{w:.3}")).collect();
            println!("  {d:<28} {}", shown.join(" "));
        }
    }

    // min_df and max_features prune the vocabulary
    let pruned = NGramConfig {
        min_df: 2,
        ..NGramConfig::with_range(1, 2)
    };
    let v = Vectorizer::fit(&docs, &pruned, VectorizerKind::Count).unwrap();
    println!("\nmin_df=2 keeps {:?}", v.vocabulary.terms());
}
