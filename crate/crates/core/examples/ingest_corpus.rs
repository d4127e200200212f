//! Read the bundled brat fixture and print its relation instances.
//!
//!     cargo run --example ingest_corpus [DIR]

use std::path::PathBuf;

use lingtransfer::corpus::{corpus_stats, load_dataset, DocumentSource, RuleSegmenter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/risec"));
    let splits = load_dataset(&dir, DocumentSource::Risec, None, &RuleSegmenter::default(), 0)?;
    println!("labels: {:?}", splits.schema.labels);
    for x in splits.all() {
        println!("{:<16} {:<12} [{}] -> [{}]", x.id, x.label, x.e1_text(), x.e2_text());
    }
    let all: Vec<_> = splits.all().cloned().collect();
    println!("{:?}", corpus_stats(&all));
    Ok(())
}
