//! One forward pass with and without a graph, showing that an all-zero
//! graph encoder leaves the prediction unchanged.

use lingtransfer::linggraph::relation_vocabulary;
use lingtransfer::model::{
    baseline_forward, graph_forward, prepare_instance, Classifier, ClassifierConfig, EncoderSpec, GraphMode, RelConv,
    TinyAdapter,
};
use lingtransfer::synthetic::graph_decodable_task;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = graph_decodable_task(4, 1);
    let spec = EncoderSpec::Tiny {
        vocab_size: 256,
        hidden: 16,
        max_tokens: 64,
    };
    let adapter = TinyAdapter::new(&spec).unwrap();
    let vocab = relation_vocabulary(task.dependency_graphs.values());
    let config = ClassifierConfig::new(spec, task.schema.num_classes(), GraphMode::Dependency, vocab.clone());
    let model = Classifier::new(config.clone(), 0)?;
    let x = &task.instances[0];
    let prepared = prepare_instance(
        x,
        task.schema.index_of(&x.label),
        task.dependency_graphs.get(&x.id),
        &adapter,
        &config,
        &config.relation_index(),
    )?;
    let enc = model.encode(&prepared)?;
    let graph = prepared.graph.as_ref().unwrap();
    let head = &model.params.head;
    let conv = model.params.conv.as_ref().unwrap();
    let zero = RelConv::zeros(config.hidden(), config.depth, vocab.len(), None);
    println!("{}  [{}] -> [{}]", x.context, x.e1_text(), x.e2_text());
    println!("baseline     {:.4?}", baseline_forward(&enc, &prepared.e1, &prepared.e2, head, &x.id)?.to_vec());
    println!("zero R-GCN   {:.4?}", graph_forward(&enc, graph, &prepared.e1, &prepared.e2, &zero, head, &x.id)?.to_vec());
    println!("random R-GCN {:.4?}", graph_forward(&enc, graph, &prepared.e1, &prepared.e2, conv, head, &x.id)?.to_vec());
    Ok(())
}
