//! Corpus ingestion: annotated flow-graph documents become relation
//! instances whose context is the minimal run of sentences covering both
//! entities.
//!
//! Entity types from the source annotations are dropped on read; nothing in
//! this module carries them.

mod io;
mod readers;
mod segment;
mod span;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{append_jsonl, read_jsonl, write_jsonl};
pub use readers::{
    load_dataset, read_brat_document, read_efgc_document, read_generic_documents, DatasetSplits,
    DocumentSource, SplitManifest,
};
pub use segment::{segment_context, RuleSegmenter, SentenceSegmenter};
pub use span::{char_len, slice_chars, Span};
pub use tokenize::{tokenize_words, tokens_in, Token};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed document {document}: {message}")]
    MalformedDocument { document: String, message: String },
    #[error("segmentation inconsistency in {document}: entity {entity} lies outside every sentence")]
    SegmentationInconsistency { document: String, entity: String },
    #[error("segmentation failed: {0}")]
    Segmentation(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Risec,
    Efgc,
    Mscorpus,
    Fixture,
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dataset::Risec => "RISeC",
            Dataset::Efgc => "EFGC",
            Dataset::Mscorpus => "MSCorpus",
            Dataset::Fixture => "fixture",
        })
    }
}

impl std::str::FromStr for Dataset {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "risec" => Ok(Dataset::Risec),
            "efgc" => Ok(Dataset::Efgc),
            "mscorpus" => Ok(Dataset::Mscorpus),
            "fixture" | "generic" => Ok(Dataset::Fixture),
            other => Err(CorpusError::InvalidArgument(format!("unknown dataset {other:?}"))),
        }
    }
}

/// An annotated entity mention. Has no type field; readers drop types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl EntitySpan {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTriple {
    pub head: String,
    pub label: String,
    pub tail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub sentences: Vec<Span>,
    pub entities: Vec<EntitySpan>,
    pub relations: Vec<RelationTriple>,
}

impl Document {
    /// Check the structural invariants: entity offsets and surfaces,
    /// ordered non-overlapping sentences, and relation endpoints.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let malformed = |message: String| CorpusError::MalformedDocument {
            document: self.id.clone(),
            message,
        };
        let n = char_len(&self.text);
        let mut prev = 0;
        for (i, s) in self.sentences.iter().enumerate() {
            if s.is_empty() || s.start < prev || s.end > n {
                return Err(malformed(format!("sentence {i} span {:?} is invalid", (s.start, s.end))));
            }
            prev = s.end;
        }
        let mut ids = BTreeSet::new();
        for e in &self.entities {
            if e.start >= e.end || e.end > n {
                return Err(malformed(format!("entity {} has invalid offsets", e.id)));
            }
            if slice_chars(&self.text, e.span()) != e.surface {
                return Err(malformed(format!("entity {} surface does not match text", e.id)));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(malformed(format!("duplicate entity id {}", e.id)));
            }
        }
        for (i, r) in self.relations.iter().enumerate() {
            for end in [&r.head, &r.tail] {
                if !ids.contains(end.as_str()) {
                    return Err(malformed(format!(
                        "relation {i} ({} -{}-> {}) references missing entity {end}",
                        r.head, r.label, r.tail
                    )));
                }
            }
        }
        Ok(())
    }

    fn sentence_range_of(&self, entity: &EntitySpan) -> Result<(usize, usize), CorpusError> {
        let span = entity.span();
        let hits: Vec<usize> = self
            .sentences
            .iter()
            .enumerate()
            .filter(|(_, s)| s.intersects(&span))
            .map(|(i, _)| i)
            .collect();
        match (hits.first(), hits.last()) {
            (Some(&a), Some(&b)) => Ok((a, b)),
            _ => Err(CorpusError::SegmentationInconsistency {
                document: self.id.clone(),
                entity: entity.id.clone(),
            }),
        }
    }
}

/// One `(entity1, relation, entity2)` triple with its sentence context.
///
/// Entity spans are character offsets relative to `context`; the sentence
/// range is inclusive and indexes the source document's sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInstance {
    pub id: String,
    pub dataset: Dataset,
    pub context: String,
    pub sent_range: (usize, usize),
    pub e1_span: Span,
    pub e2_span: Span,
    pub label: String,
}

impl RelationInstance {
    /// Id of the source document (the part before the final `#`).
    pub fn document_id(&self) -> &str {
        self.id.rsplit_once('#').map(|(d, _)| d).unwrap_or(&self.id)
    }

    pub fn e1_text(&self) -> &str {
        slice_chars(&self.context, self.e1_span)
    }

    pub fn e2_text(&self) -> &str {
        slice_chars(&self.context, self.e2_span)
    }
}

/// Classification space of one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub dataset: String,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_map: Option<BTreeMap<String, String>>,
}

impl LabelSchema {
    pub fn new(dataset: impl Into<String>, labels: Vec<String>) -> Self {
        LabelSchema {
            dataset: dataset.into(),
            labels,
            merge_map: None,
        }
    }

    /// Schema whose classes are the merged labels of `merge_map`, sorted.
    pub fn from_merge_map(dataset: impl Into<String>, merge_map: BTreeMap<String, String>) -> Self {
        let labels: BTreeSet<String> = merge_map.values().cloned().collect();
        LabelSchema {
            dataset: dataset.into(),
            labels: labels.into_iter().collect(),
            merge_map: Some(merge_map),
        }
    }

    /// Schema over the sorted distinct labels of `instances`.
    pub fn from_instances(dataset: impl Into<String>, instances: &[RelationInstance]) -> Self {
        let labels: BTreeSet<String> = instances.iter().map(|i| i.label.clone()).collect();
        LabelSchema::new(dataset, labels.into_iter().collect())
    }

    /// Parse a merge map from JSON `{"raw": "merged", ...}`.
    pub fn merge_map_from_json(json: &str) -> Result<BTreeMap<String, String>, CorpusError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// True when `label` is a final class or a raw label in the merge map.
    pub fn accepts(&self, label: &str) -> bool {
        self.index_of(label).is_some()
            || self.merge_map.as_ref().is_some_and(|m| m.contains_key(label))
    }
}

/// Turn every relation of `document` into an instance whose context is the
/// shortest run of contiguous sentences covering both entity spans.
pub fn extract_instances(
    document: &Document,
    dataset: Dataset,
    schema: &LabelSchema,
) -> Result<Vec<RelationInstance>, CorpusError> {
    document.validate()?;
    let entities: HashMap<&str, &EntitySpan> =
        document.entities.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut out = Vec::with_capacity(document.relations.len());
    for (k, rel) in document.relations.iter().enumerate() {
        // validate() guarantees both endpoints exist
        let head = entities[rel.head.as_str()];
        let tail = entities[rel.tail.as_str()];
        if !schema.accepts(&rel.label) {
            return Err(CorpusError::UnknownLabel(rel.label.clone()));
        }
        let (h0, h1) = document.sentence_range_of(head)?;
        let (t0, t1) = document.sentence_range_of(tail)?;
        let first = h0.min(t0);
        let last = h1.max(t1);
        let ctx_span = Span::new(document.sentences[first].start, document.sentences[last].end);
        // entities may poke outside the sentence spans only through whitespace
        let ctx_span = Span::new(
            ctx_span.start.min(head.start).min(tail.start),
            ctx_span.end.max(head.end).max(tail.end),
        );
        out.push(RelationInstance {
            id: format!("{}#{}", document.id, k),
            dataset,
            context: slice_chars(&document.text, ctx_span).to_string(),
            sent_range: (first, last),
            e1_span: head.span().shift_left(ctx_span.start),
            e2_span: tail.span().shift_left(ctx_span.start),
            label: rel.label.clone(),
        });
    }
    Ok(out)
}

/// Replace raw labels with their merged labels.
pub fn remap_labels(
    instances: Vec<RelationInstance>,
    schema: &LabelSchema,
) -> Result<Vec<RelationInstance>, CorpusError> {
    let Some(map) = &schema.merge_map else {
        return Ok(instances);
    };
    instances
        .into_iter()
        .map(|mut inst| {
            let merged = map
                .get(&inst.label)
                .ok_or_else(|| CorpusError::UnknownLabel(inst.label.clone()))?;
            inst.label = merged.clone();
            Ok(inst)
        })
        .collect()
}

/// Seeded random partition into `(train, dev)` with `|dev| = round(fraction * n)`.
pub fn make_splits<T: Clone>(
    instances: &[T],
    dev_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), CorpusError> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(CorpusError::InvalidArgument(format!(
            "dev fraction must lie in (0, 1), got {dev_fraction}"
        )));
    }
    if instances.len() < 2 {
        return Err(CorpusError::InsufficientData(format!(
            "need at least 2 instances to split, got {}",
            instances.len()
        )));
    }
    let mut order: Vec<usize> = (0..instances.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_dev = (dev_fraction * instances.len() as f64).round() as usize;
    let mut dev_idx = order[..n_dev].to_vec();
    let mut train_idx = order[n_dev..].to_vec();
    dev_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((
        train_idx.into_iter().map(|i| instances[i].clone()).collect(),
        dev_idx.into_iter().map(|i| instances[i].clone()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub relations: usize,
    pub labels: usize,
    /// `(label, count)` sorted by descending count, then label.
    pub label_frequencies: Vec<(String, usize)>,
}

pub fn corpus_stats(instances: &[RelationInstance]) -> CorpusStats {
    let documents: BTreeSet<&str> = instances.iter().map(|i| i.document_id()).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for inst in instances {
        *counts.entry(inst.label.as_str()).or_default() += 1;
    }
    let mut label_frequencies: Vec<(String, usize)> =
        counts.into_iter().map(|(l, c)| (l.to_string(), c)).collect();
    label_frequencies.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    CorpusStats {
        documents: documents.len(),
        relations: instances.len(),
        labels: label_frequencies.len(),
        label_frequencies,
    }
}
