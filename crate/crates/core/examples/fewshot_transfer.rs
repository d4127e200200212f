//! Train on one synthetic dataset, then compare K-shot training on a second
//! one from scratch and from the transferred weights.

use lingtransfer::analysis::macro_f1;
use lingtransfer::corpus::RelationInstance;
use lingtransfer::fewshot::{predict_all, sample_fewshot, train_until_early_stop, transfer_init, GridDataset, TrainConfig};
use lingtransfer::linggraph::relation_vocabulary;
use lingtransfer::model::{prepare_instance, Classifier, ClassifierConfig, EncoderSpec, GraphMode, PreparedInstance, TinyAdapter};
use lingtransfer::synthetic::fixture_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = fixture_grid(&["source", "target"], 200, 3);
    let spec = EncoderSpec::Tiny {
        vocab_size: 512,
        hidden: 16,
        max_tokens: 64,
    };
    let adapter = TinyAdapter::new(&spec).unwrap();
    let vocab = relation_vocabulary(data.iter().flat_map(|d| d.dependency_graphs.values()));
    let cfg = |d: &GridDataset| ClassifierConfig::new(spec.clone(), d.schema.num_classes(), GraphMode::Dependency, vocab.clone());
    let prep = |d: &GridDataset, xs: &[RelationInstance]| -> Vec<PreparedInstance> {
        let c = cfg(d);
        xs.iter()
            .map(|x| prepare_instance(x, d.schema.index_of(&x.label), d.dependency_graphs.get(&x.id), &adapter, &c, &c.relation_index()).unwrap())
            .collect()
    };
    let train = TrainConfig {
        learning_rate: 1e-2,
        batch_size: 8,
        ..TrainConfig::default()
    };
    let (src, tgt) = (&data[0], &data[1]);
    let (source_model, outcome) =
        train_until_early_stop(Classifier::new(cfg(src), 0)?, &prep(src, &src.train), &prep(src, &src.dev), &train, 0)?;
    println!("source: dev F1 {:.1} after {} epochs", outcome.dev_f1, outcome.epochs_run);

    let test = prep(tgt, &tgt.test);
    let golds: Vec<usize> = test.iter().map(|x| x.label.unwrap()).collect();
    let dev = prep(tgt, &tgt.dev);
    for k in [1, 5, 10] {
        let shots = sample_fewshot(&tgt.train, |x| x.label.clone(), k, 0)?;
        let shots = prep(tgt, &shots);
        let few = TrainConfig { batch_size: 4, ..train.clone() };
        let (scratch, _) = train_until_early_stop(Classifier::new(cfg(tgt), 0)?, &shots, &dev, &few, 0)?;
        let init = transfer_init(&source_model, GraphMode::Dependency, tgt.schema.num_classes(), 0)?;
        let (moved, _) = train_until_early_stop(init, &shots, &dev, &few, 0)?;
        let f1 = |m: &Classifier| macro_f1(&predict_all(m, &test).unwrap(), &golds, tgt.schema.num_classes()).unwrap();
        println!("K={k:<3} from scratch {:5.1}   transferred {:5.1}", f1(&scratch), f1(&moved));
    }
    Ok(())
}
