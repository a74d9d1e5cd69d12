//! Read labeled splits from CSV, TSV or JSON lines, count classes and look
//! for texts shared between splits.
//!
//! cargo run --example load_corpus -- train.csv dev.tsv test.jsonl

use std::path::Path;

use hopeclf::corpus::{check_split_integrity, load_dataset, read_dataset, stats, Dataset, Format, Schema, Split};

fn load(path: Option<String>, split: Split, fallback: &str) -> Dataset {
    match path {
        Some(p) => {
            let p = Path::new(&p);
            load_dataset(p, Format::from_path(p), &Schema::default(), split).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
        }
        None => read_dataset(fallback.as_bytes(), Format::Csv, &Schema::default(), split).unwrap(),
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let train = load(
        args.next(),
        Split::Train,
        "id,text,label\n1,\"we will rise, together\",Hope\n2,nothing ever changes,Not Hope\n3,Keep going!,hope\n",
    );
    let dev = load(args.next(), Split::Dev, "text,label\nwe will rise together,1\nbetter days,0\n");
    let test = load(args.next(), Split::Test, "id,text\nt1,KEEP  going!\nt2,unseen text\n");

    for ds in [&train, &dev] {
        println!("{}:\n{}", ds.split, stats(ds).unwrap());
    }
    println!("test: {} documents, labeled: {}", test.len(), test.is_labeled());

    for c in check_split_integrity(&train, &dev, &test) {
        println!("shared between {} and {}: {:?}", c.splits.0, c.splits.1, c.normalized_text);
    }
}
