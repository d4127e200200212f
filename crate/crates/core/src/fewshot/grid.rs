use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    derive_seed, sample_fewshot, seed_offsets, train_until_early_stop, transfer_init, Case, FewShotError, RunRecord,
    Shots, TrainConfig, FROM_SCRATCH,
};
use crate::corpus::{append_jsonl, read_jsonl, LabelSchema, RelationInstance};
use crate::fewshot::evaluate;
use crate::linggraph::{relation_vocabulary, GraphFile, LinguisticGraph};
use crate::model::{
    load_checkpoint, prepare_instance, save_checkpoint, Classifier, ClassifierConfig, EncoderAdapter, EncoderSpec,
    PreparedInstance,
};

/// One dataset with its splits and per-instance graphs.
#[derive(Debug, Clone)]
pub struct GridDataset {
    pub name: String,
    pub schema: LabelSchema,
    pub train: Vec<RelationInstance>,
    pub dev: Vec<RelationInstance>,
    pub test: Vec<RelationInstance>,
    pub dependency_graphs: GraphFile,
    pub amr_graphs: GraphFile,
}

impl GridDataset {
    fn graphs(&self, case: Case) -> Option<&GraphFile> {
        match case {
            Case::Baseline => None,
            Case::Dep => Some(&self.dependency_graphs),
            Case::Amr => Some(&self.amr_graphs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    InDomainFull,
    FromScratchFewshot,
    TransferFewshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub encoder: EncoderSpec,
    pub cases: Vec<Case>,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub modes: Vec<GridMode>,
    pub in_domain: TrainConfig,
    pub fewshot: TrainConfig,
    pub depth: usize,
    pub num_bases: Option<usize>,
}

impl GridConfig {
    /// The full experimental design over `encoder`.
    pub fn full(encoder: EncoderSpec) -> Self {
        GridConfig {
            encoder,
            cases: Case::ALL.to_vec(),
            ks: super::SHOT_COUNTS.to_vec(),
            seeds: vec![0, 1, 2],
            modes: vec![GridMode::InDomainFull, GridMode::FromScratchFewshot, GridMode::TransferFewshot],
            in_domain: TrainConfig::default(),
            fewshot: TrainConfig::fewshot(),
            depth: 4,
            num_bases: None,
        }
    }
}

/// Identifies one run in the grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCell {
    pub source: String,
    pub target: String,
    pub case: Case,
    pub k: Shots,
    pub seed: u64,
    pub transfer: bool,
}

impl fmt::Display for GridCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}->{} {} K={} seed={}{}",
            self.source,
            self.target,
            self.case,
            self.k,
            self.seed,
            if self.transfer { " transfer" } else { "" }
        )
    }
}

/// Records (`records.jsonl`) and in-domain checkpoints under one directory.
#[derive(Debug, Clone)]
pub struct RecordStore {
    root: PathBuf,
}

impl RecordStore {
    pub fn open(root: &Path) -> Result<Self, FewShotError> {
        std::fs::create_dir_all(root.join("checkpoints"))?;
        Ok(RecordStore { root: root.to_path_buf() })
    }

    pub fn records_path(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }

    pub fn records(&self) -> Result<Vec<RunRecord>, FewShotError> {
        let path = self.records_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        Ok(read_jsonl(&path)?)
    }

    pub fn append(&self, record: &RunRecord) -> Result<(), FewShotError> {
        append_jsonl(&self.records_path(), std::slice::from_ref(record))?;
        Ok(())
    }

    pub fn checkpoint_path(&self, dataset: &str, case: Case, seed: u64) -> PathBuf {
        let safe: String = dataset
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        self.root.join("checkpoints").join(format!("{safe}-{case}-seed{seed}.json"))
    }
}

struct Prepared {
    train: Vec<PreparedInstance>,
    dev: Vec<PreparedInstance>,
    test: Vec<PreparedInstance>,
}

struct Runner<'a> {
    datasets: &'a [GridDataset],
    config: &'a GridConfig,
    adapter: &'a dyn EncoderAdapter,
    store: &'a RecordStore,
    vocab: HashMap<Case, Vec<String>>,
    prepared: HashMap<(usize, Case), Prepared>,
}

impl Runner<'_> {
    fn model_config(&self, case: Case, num_classes: usize) -> ClassifierConfig {
        let mut c = ClassifierConfig::new(
            self.config.encoder.clone(),
            num_classes,
            case.graph_mode(),
            self.vocab[&case].clone(),
        );
        c.depth = self.config.depth;
        c.num_bases = self.config.num_bases;
        c
    }

    fn prepare_split(
        &self,
        ds: &GridDataset,
        case: Case,
        items: &[RelationInstance],
    ) -> Result<Vec<PreparedInstance>, FewShotError> {
        let cfg = self.model_config(case, ds.schema.num_classes());
        let index = cfg.relation_index();
        items
            .iter()
            .map(|inst| {
                let label = ds.schema.index_of(&inst.label).ok_or_else(|| {
                    FewShotError::Invalid(format!("instance {}: label {:?} not in {}", inst.id, inst.label, ds.name))
                })?;
                let graph: Option<&LinguisticGraph> = ds.graphs(case).and_then(|g| g.get(&inst.id));
                Ok(prepare_instance(inst, Some(label), graph, self.adapter, &cfg, &index)?)
            })
            .collect()
    }

    fn prepared(&mut self, d: usize, case: Case) -> Result<&Prepared, FewShotError> {
        if !self.prepared.contains_key(&(d, case)) {
            let ds = &self.datasets[d];
            let p = Prepared {
                train: self.prepare_split(ds, case, &ds.train)?,
                dev: self.prepare_split(ds, case, &ds.dev)?,
                test: self.prepare_split(ds, case, &ds.test)?,
            };
            self.prepared.insert((d, case), p);
        }
        Ok(&self.prepared[&(d, case)])
    }

    fn in_domain(&mut self, d: usize, case: Case, seed: u64) -> Result<RunRecord, FewShotError> {
        let ds = &self.datasets[d];
        let cfg = self.model_config(case, ds.schema.num_classes());
        let model = Classifier::new(cfg, derive_seed(seed, seed_offsets::INIT))?;
        let train_cfg = self.config.in_domain.clone();
        let data = self.prepared(d, case)?;
        let (best, outcome) = train_until_early_stop(
            model,
            &data.train,
            &data.dev,
            &train_cfg,
            derive_seed(seed, seed_offsets::SHUFFLE),
        )?;
        let test_f1 = evaluate(&best, &data.test)?;
        save_checkpoint(&self.store.checkpoint_path(&ds.name, case, seed), &best)?;
        Ok(RunRecord {
            source: ds.name.clone(),
            target: ds.name.clone(),
            case,
            k: Shots::Full,
            seed,
            transfer: false,
            dev_f1: outcome.dev_f1,
            test_f1,
            epochs: outcome.epochs_run,
        })
    }

    fn fewshot(&mut self, source: Option<usize>, t: usize, case: Case, k: usize, seed: u64) -> Result<RunRecord, FewShotError> {
        let target = &self.datasets[t];
        let num_classes = target.schema.num_classes();
        let cell = GridCell {
            source: source.map_or(FROM_SCRATCH.to_string(), |s| self.datasets[s].name.clone()),
            target: target.name.clone(),
            case,
            k: Shots::K(k),
            seed,
            transfer: source.is_some(),
        };
        let model = match source {
            None => Classifier::new(self.model_config(case, num_classes), derive_seed(seed, seed_offsets::INIT))?,
            Some(s) => {
                let path = self.store.checkpoint_path(&self.datasets[s].name, case, seed);
                if !path.exists() {
                    return Err(FewShotError::MissingArtifact {
                        cell: cell.to_string(),
                        what: format!("in-domain checkpoint {}", path.display()),
                    });
                }
                let src = load_checkpoint(&path)?;
                if src.config.relation_vocabulary != self.vocab[&case] || src.config.encoder != self.config.encoder {
                    return Err(FewShotError::Invalid(format!(
                        "cell {cell}: checkpoint {} was trained with a different encoder or relation vocabulary",
                        path.display()
                    )));
                }
                transfer_init(&src, case.graph_mode(), num_classes, derive_seed(seed, seed_offsets::HEAD))?
            }
        };
        let train_cfg = self.config.fewshot.clone();
        let data = self.prepared(t, case)?;
        let sample = sample_fewshot(
            &data.train,
            |x| x.label,
            k,
            derive_seed(seed, seed_offsets::SAMPLE),
        )?;
        let (best, outcome) = train_until_early_stop(
            model,
            &sample,
            &data.dev,
            &train_cfg,
            derive_seed(seed, seed_offsets::SHUFFLE),
        )?;
        let test_f1 = evaluate(&best, &data.test)?;
        Ok(RunRecord {
            source: cell.source,
            target: cell.target,
            case,
            k: cell.k,
            seed,
            transfer: cell.transfer,
            dev_f1: outcome.dev_f1,
            test_f1,
            epochs: outcome.epochs_run,
        })
    }
}

fn planned_cells(datasets: &[GridDataset], config: &GridConfig) -> Vec<(GridMode, Option<usize>, usize, Case, Shots, u64)> {
    let mut cells = Vec::new();
    for &mode in &config.modes {
        for (t, _) in datasets.iter().enumerate() {
            let sources: Vec<Option<usize>> = match mode {
                GridMode::InDomainFull | GridMode::FromScratchFewshot => vec![None],
                GridMode::TransferFewshot => (0..datasets.len()).filter(|&s| s != t).map(Some).collect(),
            };
            for src in sources {
                for &case in &config.cases {
                    let ks: Vec<Shots> = match mode {
                        GridMode::InDomainFull => vec![Shots::Full],
                        _ => config.ks.iter().map(|&k| Shots::K(k)).collect(),
                    };
                    for k in ks {
                        for &seed in &config.seeds {
                            cells.push((mode, src, t, case, k, seed));
                        }
                    }
                }
            }
        }
    }
    // in-domain models must exist before transfer runs
    cells.sort_by_key(|c| match c.0 {
        GridMode::InDomainFull => 0,
        GridMode::FromScratchFewshot => 1,
        GridMode::TransferFewshot => 2,
    });
    cells
}

/// Run every cell of the grid not already in `store`, appending each new
/// record as it finishes. Returns the records of all requested cells.
pub fn run_grid(
    datasets: &[GridDataset],
    config: &GridConfig,
    adapter: &dyn EncoderAdapter,
    store: &RecordStore,
    progress: &mut dyn FnMut(&RunRecord),
) -> Result<Vec<RunRecord>, FewShotError> {
    if adapter.spec() != config.encoder {
        return Err(FewShotError::Invalid("encoder adapter does not match the grid encoder".into()));
    }
    if config.ks.contains(&0) {
        return Err(FewShotError::Invalid("K must be at least 1".into()));
    }
    let names: BTreeSet<&str> = datasets.iter().map(|d| d.name.as_str()).collect();
    if names.len() != datasets.len() || names.contains(FROM_SCRATCH) {
        return Err(FewShotError::Invalid("dataset names must be distinct".into()));
    }
    config.in_domain.validate()?;
    config.fewshot.validate()?;

    let mut vocab = HashMap::new();
    for case in Case::ALL {
        let v = match case {
            Case::Baseline => Vec::new(),
            _ => relation_vocabulary(datasets.iter().flat_map(|d| d.graphs(case).into_iter().flat_map(|g| g.values()))),
        };
        vocab.insert(case, v);
    }
    let mut runner = Runner {
        datasets,
        config,
        adapter,
        store,
        vocab,
        prepared: HashMap::new(),
    };

    let mut done: HashMap<GridCell, RunRecord> = store.records()?.into_iter().map(|r| (r.cell(), r)).collect();
    let mut out = Vec::new();
    for (mode, src, t, case, k, seed) in planned_cells(datasets, config) {
        let cell = GridCell {
            source: match (mode, src) {
                (GridMode::InDomainFull, _) => datasets[t].name.clone(),
                (_, None) => FROM_SCRATCH.to_string(),
                (_, Some(s)) => datasets[s].name.clone(),
            },
            target: datasets[t].name.clone(),
            case,
            k,
            seed,
            transfer: src.is_some(),
        };
        if let Some(r) = done.get(&cell) {
            out.push(r.clone());
            continue;
        }
        let record = match (mode, k) {
            (GridMode::InDomainFull, _) => runner.in_domain(t, case, seed)?,
            (_, Shots::K(k)) => runner.fewshot(src, t, case, k, seed)?,
            (_, Shots::Full) => unreachable!("few-shot cells carry K"),
        };
        store.append(&record)?;
        progress(&record);
        done.insert(cell, record.clone());
        out.push(record);
    }
    Ok(out)
}

/// Number of records a grid produces.
pub fn expected_record_count(num_datasets: usize, config: &GridConfig) -> usize {
    let cs = config.cases.len() * config.seeds.len();
    config
        .modes
        .iter()
        .map(|m| match m {
            GridMode::InDomainFull => num_datasets * cs,
            GridMode::FromScratchFewshot => num_datasets * cs * config.ks.len(),
            GridMode::TransferFewshot => num_datasets * (num_datasets.saturating_sub(1)) * cs * config.ks.len(),
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_counts() {
        let mut c = GridConfig::full(EncoderSpec::tiny(4));
        c.modes = vec![GridMode::InDomainFull];
        assert_eq!(expected_record_count(3, &c), 27);
        c.modes = vec![GridMode::TransferFewshot];
        assert_eq!(expected_record_count(3, &c), 324);
    }
}
