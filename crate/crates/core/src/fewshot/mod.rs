//! Training with early stopping, K-shot sampling, transfer initialization
//! and the experiment grid.

mod grid;
mod sample;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::corpus::CorpusError;
use crate::model::{GraphMode, ModelError};

pub use grid::{expected_record_count, run_grid, GridCell, GridConfig, GridDataset, GridMode, RecordStore};
pub use sample::sample_fewshot;
pub use train::{evaluate, predict_all, train_until_early_stop, transfer_init, Adam, EarlyStopper, StopDecision, TrainOutcome};

/// Source name for runs without a pretrained source model.
pub const FROM_SCRATCH: &str = "FROM_SCRATCH";

/// The K values of the few-shot grid.
pub const SHOT_COUNTS: [usize; 6] = [1, 5, 10, 20, 50, 100];

#[derive(Debug, Error)]
pub enum FewShotError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("invalid setting: {0}")]
    Invalid(String),
    #[error("training diverged at epoch {epoch}, batch {batch}: loss {loss}")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error("graph mode mismatch: source model is {source_mode}, target expects {target_mode}")]
    ModeMismatch { source_mode: GraphMode, target_mode: GraphMode },
    #[error("cell {cell}: missing {what}")]
    MissingArtifact { cell: String, what: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which model variant a run trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Baseline,
    Dep,
    Amr,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::Baseline, Case::Dep, Case::Amr];

    pub fn graph_mode(self) -> GraphMode {
        match self {
            Case::Baseline => GraphMode::None,
            Case::Dep => GraphMode::Dependency,
            Case::Amr => GraphMode::Amr,
        }
    }

    /// Column heading used in tables.
    pub fn heading(self) -> &'static str {
        match self {
            Case::Baseline => "Baseline",
            Case::Dep => "+Dep",
            Case::Amr => "+AMR",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Baseline => "baseline",
            Case::Dep => "dep",
            Case::Amr => "amr",
        })
    }
}

impl FromStr for Case {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().trim_start_matches('+') {
            "baseline" | "none" => Ok(Case::Baseline),
            "dep" | "dependency" => Ok(Case::Dep),
            "amr" => Ok(Case::Amr),
            _ => Err(format!("unknown case {s:?}")),
        }
    }
}

/// Training-set size: K examples per class, or the full split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    K(usize),
    Full,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    N(usize),
    S(String),
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = String;
    fn try_from(r: ShotsRepr) -> Result<Self, String> {
        match r {
            ShotsRepr::N(0) => Err("K must be at least 1".into()),
            ShotsRepr::N(k) => Ok(Shots::K(k)),
            ShotsRepr::S(s) => s.parse(),
        }
    }
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::K(k) => ShotsRepr::N(k),
            Shots::Full => ShotsRepr::S("FULL".into()),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::K(k) => write!(f, "{k}"),
            Shots::Full => f.write_str("FULL"),
        }
    }
}

impl FromStr for Shots {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(Shots::Full);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("bad K {s:?}")),
            Ok(k) => Ok(Shots::K(k)),
        }
    }
}

/// One trained-and-evaluated model.
///
/// In-domain runs have `source == target`, `k = FULL`, `transfer = false`;
/// few-shot runs from scratch have `source = FROM_SCRATCH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub source: String,
    pub target: String,
    pub case: Case,
    pub k: Shots,
    pub seed: u64,
    pub transfer: bool,
    pub dev_f1: f64,
    pub test_f1: f64,
    pub epochs: usize,
}

impl RunRecord {
    pub fn cell(&self) -> GridCell {
        GridCell {
            source: self.source.clone(),
            target: self.target.clone(),
            case: self.case,
            k: self.k,
            seed: self.seed,
            transfer: self.transfer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seeds: Vec<u64>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-5,
            batch_size: 16,
            max_epochs: 30,
            patience: 5,
            seeds: vec![0, 1, 2],
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    /// Settings for few-shot and transfer runs (batch size 4).
    pub fn fewshot() -> Self {
        TrainConfig {
            batch_size: 4,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), FewShotError> {
        if self.patience > self.max_epochs {
            return Err(FewShotError::Invalid(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(FewShotError::Invalid("batch size, epochs and patience must be positive".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(FewShotError::Invalid("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Offsets deriving the per-purpose seeds from a run seed.
pub mod seed_offsets {
    pub const SHUFFLE: u64 = 1;
    pub const SAMPLE: u64 = 2;
    pub const HEAD: u64 = 3;
    pub const INIT: u64 = 4;
}

/// Mix `run_seed` and `offset` into an independent-looking seed.
pub fn derive_seed(run_seed: u64, offset: u64) -> u64 {
    let mut z = run_seed
        .wrapping_add(offset.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shots_serde() {
        assert_eq!(serde_json::to_string(&Shots::K(5)).unwrap(), "5");
        assert_eq!(serde_json::to_string(&Shots::Full).unwrap(), "\"FULL\"");
        assert_eq!(serde_json::from_str::<Shots>("\"FULL\"").unwrap(), Shots::Full);
        assert!(serde_json::from_str::<Shots>("0").is_err());
    }

    #[test]
    fn config_defaults() {
        let c = TrainConfig::default();
        assert_eq!((c.learning_rate, c.batch_size, c.max_epochs, c.patience), (2e-5, 16, 30, 5));
        assert_eq!(c.seeds.len(), 3);
        assert_eq!(TrainConfig::fewshot().batch_size, 4);
        let bad = TrainConfig {
            patience: 40,
            ..c
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::BTreeSet<u64> = (0..4).map(|o| derive_seed(7, o)).collect();
        assert_eq!(s.len(), 4);
        assert_eq!(derive_seed(7, 2), derive_seed(7, 2));
    }
}
