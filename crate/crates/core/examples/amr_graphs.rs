//! Build dependency and AMR context graphs for the generic fixture and
//! report entity path lengths.

use std::path::Path;

use lingtransfer::align::{realign, AlignmentConfig, RuleLemmatizer};
use lingtransfer::corpus::{load_dataset, tokenize_words, tokens_in, DocumentSource, RuleSegmenter};
use lingtransfer::linggraph::{entity_path_stats, graphs_from_parses, mean_path_length, Formalism};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/generic");
    let splits = load_dataset(&root.join("corpus"), DocumentSource::Generic, None, &RuleSegmenter::default(), 0)?;
    let instances: Vec<_> = splits.all().cloned().collect();
    for formalism in [Formalism::Dependency, Formalism::Amr] {
        let (mut graphs, parseless) = graphs_from_parses(formalism, &instances, &root.join("parses"))?;
        if formalism == Formalism::Amr {
            // the fixture parses carry no alignments of their own
            for g in graphs.values_mut() {
                g.alignments = realign(g, &g.tokens, &g.alignments, &RuleLemmatizer, &AlignmentConfig::default());
            }
        }
        let first = &graphs[&instances[0].id];
        println!("{formalism:?}: {} graphs, {parseless} parseless", graphs.len());
        println!("  {}: {} nodes, relations {:?}", instances[0].id, first.num_nodes(), first.relation_labels());
        let lengths = instances.iter().map(|x| {
            let tokens = tokenize_words(&x.context);
            let (e1, e2) = (tokens_in(&tokens, x.e1_span), tokens_in(&tokens, x.e2_span));
            entity_path_stats(&graphs[&x.id], &e1, &e2)
        });
        println!("  mean entity path length: {:?}", mean_path_length(lengths));
    }
    Ok(())
}
