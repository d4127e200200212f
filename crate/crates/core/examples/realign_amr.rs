//! Fill gaps in a partial AMR alignment and compare coverage before and after.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lingtransfer::align::{coverage_report, read_alignment_file, realign, AlignmentConfig, RuleLemmatizer};
use lingtransfer::linggraph::read_amr_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/amr_alignment");
    let graphs = read_amr_corpus(&fs::read_to_string(dir.join("gold.amr"))?)?;
    let base = read_alignment_file(&dir.join("base_alignments.json"))?;
    let config = AlignmentConfig::default();
    let empty = BTreeMap::new();
    let after: BTreeMap<_, _> = graphs
        .iter()
        .map(|(id, g)| (id.clone(), realign(g, &g.tokens, base.get(id).unwrap_or(&empty), &RuleLemmatizer, &config)))
        .collect();
    let before = coverage_report(graphs.iter().map(|(id, g)| (id.as_str(), g, base.get(id).unwrap_or(&empty))), &config);
    let now = coverage_report(graphs.iter().map(|(id, g)| (id.as_str(), g, &after[id])), &config);
    println!("alignable triples: {}", now.total_alignable);
    println!("with an unaligned endpoint: {:.1}% -> {:.1}%", 100.0 * before.unaligned_fraction(), 100.0 * now.unaligned_fraction());
    let (id, g) = graphs.iter().next().unwrap();
    println!("{id}: {}", g.tokens.join(" "));
    for (node, toks) in &after[id] {
        println!("  {:>2} {:<12} -> {:?}", node, g.nodes[*node].label, toks);
    }
    Ok(())
}
