use lingtransfer::fewshot::{evaluate, train_until_early_stop, transfer_init, TrainConfig};
use lingtransfer::linggraph::relation_vocabulary;
use lingtransfer::model::{
    load_checkpoint, prepare_instance, save_checkpoint, Classifier, ClassifierConfig, EncoderSpec, GraphMode,
    PreparedInstance, TinyAdapter,
};
use lingtransfer::fewshot::GridDataset;
use lingtransfer::synthetic::fixture_grid;

fn setup(mode: GraphMode) -> (GridDataset, ClassifierConfig, Vec<PreparedInstance>, Vec<PreparedInstance>) {
    let ds = fixture_grid(&["alpha"], 40, 11).remove(0);
    let spec = EncoderSpec::Tiny {
        vocab_size: 128,
        hidden: 8,
        max_tokens: 48,
    };
    let adapter = TinyAdapter::new(&spec).unwrap();
    let vocab = relation_vocabulary(ds.dependency_graphs.values());
    let config = ClassifierConfig::new(spec, ds.schema.num_classes(), mode, vocab);
    let index = config.relation_index();
    let prep = |xs: &[lingtransfer::corpus::RelationInstance]| -> Vec<PreparedInstance> {
        xs.iter()
            .map(|x| {
                let g = (mode != GraphMode::None).then(|| ds.dependency_graphs.get(&x.id)).flatten();
                prepare_instance(x, ds.schema.index_of(&x.label), g, &adapter, &config, &index).unwrap()
            })
            .collect()
    };
    let (train, dev) = (prep(&ds.train), prep(&ds.dev));
    (ds, config, train, dev)
}

fn quick() -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-2,
        batch_size: 4,
        max_epochs: 5,
        patience: 2,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic() {
    let (_, config, train, dev) = setup(GraphMode::Dependency);
    let run = || {
        let m = Classifier::new(config.clone(), 7).unwrap();
        train_until_early_stop(m, &train, &dev, &quick(), 7).unwrap()
    };
    let (a, oa) = run();
    let (b, ob) = run();
    assert_eq!(a.params, b.params);
    assert_eq!(oa, ob);
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let (_, config, train, dev) = setup(GraphMode::Dependency);
    let m = Classifier::new(config, 2).unwrap();
    let (m, _) = train_until_early_stop(m, &train, &dev, &quick(), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_checkpoint(&path, &m).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.params, m.params);
    assert_eq!(evaluate(&back, &dev).unwrap(), evaluate(&m, &dev).unwrap());
}

#[test]
fn transfer_keeps_the_body_and_resets_the_head() {
    let (_, config, _, _) = setup(GraphMode::Dependency);
    let source = Classifier::new(config.clone(), 1).unwrap();
    let target = transfer_init(&source, GraphMode::Dependency, config.num_classes + 2, 9).unwrap();
    assert_eq!(target.params.encoder, source.params.encoder);
    assert_eq!(target.params.conv, source.params.conv);
    assert_eq!(target.config.num_classes, config.num_classes + 2);
    assert!(transfer_init(&source, GraphMode::Amr, 3, 9).is_err());
}
