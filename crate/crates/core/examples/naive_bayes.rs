//! Multinomial naive Bayes on a three-document corpus.

use hopeclf::corpus::Label;
use hopeclf::features::{NGramConfig, Vocabulary};
use hopeclf::models::train_nb;

fn main() {
    let docs = ["hope good", "hope rise", "sad bad"];
    let y = [Label::Hope, Label::Hope, Label::NotHope];
    let vocab = Vocabulary::fit(&docs, &NGramConfig::with_range(1, 1)).unwrap();
    let nb = train_nb(&vocab.count_matrix(&docs), &y, 1.0).unwrap();

    println!("priors: Hope {:.4}, NotHope {:.4}", nb.class_log_prior[0].exp(), nb.class_log_prior[1].exp());
    for (j, term) in vocab.terms().iter().enumerate() {
        println!(
            "P({term:<5}|c)  Hope {:.4}  NotHope {:.4}",
            nb.feature_log_prob[0][j].exp(),
            nb.feature_log_prob[1][j].exp()
        );
    }
    for query in ["hope", "sad", "hope bad", "unknown words"] {
        let (label, post) = nb.predict(&vocab.count_text(query)).unwrap();
        println!("{query:<14} -> {label:<8} P(Hope) = {:.6}", post[0]);
    }
    println!("14/17 = {:.6}", 14.0 / 17.0);
}
