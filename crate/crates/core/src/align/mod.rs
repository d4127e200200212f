//! Second-pass AMR alignment and alignment coverage auditing.
//!
//! A base aligner's output is taken as given. [`realign`] then repeatedly
//! walks the unaligned nodes in id order and links each one to every token
//! whose lemma equals the node's normalized label; `name` nodes pick up the
//! union of their aligned `:opN` parts. Passes repeat until one adds nothing.

mod lemma;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linggraph::{LinguisticGraph, NodeKind, TOP_LINK};

pub use lemma::{Lemmatizer, RuleLemmatizer};

/// Node id to aligned token indices.
pub type Alignments = BTreeMap<usize, BTreeSet<usize>>;

/// Alignments keyed by instance id (the alignment file format).
pub type AlignmentFile = BTreeMap<String, Alignments>;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn read_alignment_file(path: &Path) -> Result<AlignmentFile, AlignError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| AlignError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_alignment_file(path: &Path, file: &AlignmentFile) -> Result<(), AlignError> {
    fs::write(path, serde_json::to_string_pretty(file)?)?;
    Ok(())
}

/// Strip quotes, case-fold, and drop a trailing sense suffix (`-01`, `-91`).
pub fn normalize_label(label: &str) -> String {
    let unquoted = label.trim_matches('"');
    let lower = unquoted.to_lowercase();
    match lower.rsplit_once('-') {
        Some((stem, sense))
            if !stem.is_empty() && !sense.is_empty() && sense.bytes().all(|b| b.is_ascii_digit()) =>
        {
            stem.to_string()
        }
        _ => lower,
    }
}

/// Token indices whose lemma candidates include the normalized `label`.
pub fn lemma_match(label: &str, tokens: &[String], lemmatizer: &dyn Lemmatizer) -> BTreeSet<usize> {
    let target = normalize_label(label);
    if target.is_empty() {
        return BTreeSet::new();
    }
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| lemmatizer.lemmas(t).contains(&target))
        .map(|(i, _)| i)
        .collect()
}

/// Which triples and nodes count as alignable.
///
/// Defaults: structural roles `:top-link`, `:wiki`, `:mode`, `:polarity`
/// and the abstract concepts `and`, `or`, `multi-sentence`, `imperative`,
/// `-`, `+` are excluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentConfig {
    pub excluded_roles: BTreeSet<String>,
    pub excluded_concepts: BTreeSet<String>,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        AlignmentConfig {
            excluded_roles: [TOP_LINK, ":wiki", ":mode", ":polarity"].iter().map(|s| s.to_string()).collect(),
            excluded_concepts: ["and", "or", "multi-sentence", "imperative", "-", "+"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl AlignmentConfig {
    pub fn node_is_alignable(&self, graph: &LinguisticGraph, node: usize) -> bool {
        let n = &graph.nodes[node];
        n.kind != NodeKind::Top && !self.excluded_concepts.contains(&normalize_label(&n.label))
    }

    pub fn triple_is_alignable(&self, graph: &LinguisticGraph, edge: usize) -> bool {
        let e = &graph.edges[edge];
        !self.excluded_roles.contains(&e.rel)
            && self.node_is_alignable(graph, e.src)
            && self.node_is_alignable(graph, e.dst)
    }
}

fn is_aligned(alignments: &Alignments, node: usize) -> bool {
    alignments.get(&node).is_some_and(|s| !s.is_empty())
}

/// Extend `base` with heuristic alignments. Existing alignments are never
/// changed; only unaligned nodes gain tokens.
pub fn realign(
    graph: &LinguisticGraph,
    tokens: &[String],
    base: &Alignments,
    lemmatizer: &dyn Lemmatizer,
    config: &AlignmentConfig,
) -> Alignments {
    let mut out = base.clone();
    let mut op_children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in &graph.edges {
        if e.rel.starts_with(":op") {
            op_children.entry(e.src).or_default().push(e.dst);
        }
    }
    loop {
        let mut changed = false;
        for node in 0..graph.nodes.len() {
            if is_aligned(&out, node) || !config.node_is_alignable(graph, node) {
                continue;
            }
            let mut found = lemma_match(&graph.nodes[node].label, tokens, lemmatizer);
            if found.is_empty() && normalize_label(&graph.nodes[node].label) == "name" {
                if let Some(children) = op_children.get(&node) {
                    if children.iter().all(|&c| is_aligned(&out, c)) {
                        found = children.iter().flat_map(|c| out[c].iter().copied()).collect();
                    }
                }
            }
            if !found.is_empty() {
                out.insert(node, found);
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCoverage {
    pub instance_id: String,
    pub alignable: usize,
    pub aligned: usize,
    pub with_unaligned: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub total_alignable: usize,
    pub aligned: usize,
    pub with_unaligned_entity: usize,
    pub per_graph: Vec<GraphCoverage>,
}

impl AlignmentReport {
    pub fn aligned_fraction(&self) -> f64 {
        if self.total_alignable == 0 {
            0.0
        } else {
            self.aligned as f64 / self.total_alignable as f64
        }
    }

    pub fn unaligned_fraction(&self) -> f64 {
        if self.total_alignable == 0 {
            0.0
        } else {
            self.with_unaligned_entity as f64 / self.total_alignable as f64
        }
    }
}

/// Count alignable triples, fully aligned ones, and ones with at least one
/// unaligned endpoint.
pub fn coverage_report<'a, I>(graphs: I, config: &AlignmentConfig) -> AlignmentReport
where
    I: IntoIterator<Item = (&'a str, &'a LinguisticGraph, &'a Alignments)>,
{
    let mut report = AlignmentReport {
        total_alignable: 0,
        aligned: 0,
        with_unaligned_entity: 0,
        per_graph: Vec::new(),
    };
    for (id, graph, alignments) in graphs {
        let mut cov = GraphCoverage {
            instance_id: id.to_string(),
            alignable: 0,
            aligned: 0,
            with_unaligned: 0,
        };
        for (i, e) in graph.edges.iter().enumerate() {
            if !config.triple_is_alignable(graph, i) {
                continue;
            }
            cov.alignable += 1;
            if is_aligned(alignments, e.src) && is_aligned(alignments, e.dst) {
                cov.aligned += 1;
            } else {
                cov.with_unaligned += 1;
            }
        }
        report.total_alignable += cov.alignable;
        report.aligned += cov.aligned;
        report.with_unaligned_entity += cov.with_unaligned;
        report.per_graph.push(cov);
    }
    report
}
