//! Scoring, variance analysis and reporting over run records.

mod anova;
mod metrics;
mod plots;
mod special;
mod tables;

use thiserror::Error;

pub use anova::{fit_anova, format_p, posthoc_t, AnovaData, AnovaRow, AnovaTable, Factor, PairwiseT, Term};
pub use metrics::{macro_f1, per_class_f1};
pub use plots::{emit_plots, EmittedFiles};
pub use special::{f_survival, ln_gamma, regularized_beta, t_two_sided};
pub use tables::{
    diff_tables, format_mean_std, grid_terms, read_published_means, records_design, CellKey, CellStats, DiffKind,
    DiffTable, ResultsTable,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("rank-deficient design; aliased terms: {}", terms.join(", "))]
    RankDeficient { terms: Vec<String> },
    #[error("no counterpart for cell {0}")]
    MissingCell(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
