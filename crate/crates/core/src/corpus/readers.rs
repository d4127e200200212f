//! Readers for the native annotation formats.
//!
//! * brat standoff (`.txt` + `.ann`), used by RISeC and MSCorpus. `T` lines
//!   give entity spans, `R` lines binary relations, and `E` lines events whose
//!   trigger is linked to each argument by the argument role.
//! * EFGC flow-graph files (`.list` + `.flow`). A `.list` row is
//!   `step sentence word surface tag` with BIO tags written either `Ac-B` or
//!   `B-Ac`; a `.flow` row is `step sentence word step sentence word label`
//!   naming one word of the head and tail entity (a 9-column variant with the
//!   entity tag after each address is also accepted).
//! * generic JSON: one document object, or an array of them, with the
//!   [`Document`] fields; `sentences` may be omitted.
//!
//! Entity types present in any of these formats are discarded.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::segment::{segment_context, SentenceSegmenter};
use super::span::{char_len, slice_chars, Span};
use super::{
    extract_instances, make_splits, remap_labels, CorpusError, Dataset, Document, EntitySpan,
    LabelSchema, RelationInstance, RelationTriple,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentSource {
    Risec,
    Efgc,
    Mscorpus,
    Generic,
}

impl DocumentSource {
    pub fn dataset(self) -> Dataset {
        match self {
            DocumentSource::Risec => Dataset::Risec,
            DocumentSource::Efgc => Dataset::Efgc,
            DocumentSource::Mscorpus => Dataset::Mscorpus,
            DocumentSource::Generic => Dataset::Fixture,
        }
    }
}

impl std::str::FromStr for DocumentSource {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "risec" => Ok(DocumentSource::Risec),
            "efgc" => Ok(DocumentSource::Efgc),
            "mscorpus" => Ok(DocumentSource::Mscorpus),
            "generic" => Ok(DocumentSource::Generic),
            other => Err(CorpusError::InvalidArgument(format!("unknown dataset format {other:?}"))),
        }
    }
}

fn format_err(path: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::Format {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Build a document from a brat `.txt`/`.ann` pair.
pub fn read_brat_document(
    id: &str,
    text: &str,
    ann: &str,
    segmenter: &dyn SentenceSegmenter,
) -> Result<Document, CorpusError> {
    let mut entities = Vec::new();
    let mut relations = Vec::new();
    // event id -> trigger entity id
    let mut events: HashMap<String, String> = HashMap::new();
    let mut event_lines = Vec::new();

    for (lineno, line) in ann.lines().enumerate() {
        let where_ = format!("{id}.ann:{}", lineno + 1);
        let mut cols = line.split('\t');
        let Some(tag) = cols.next() else { continue };
        match tag.chars().next() {
            Some('T') => {
                let body = cols.next().ok_or_else(|| format_err(&where_, "missing entity body"))?;
                let (_, offsets) = body
                    .split_once(' ')
                    .ok_or_else(|| format_err(&where_, "missing entity offsets"))?;
                let mut start = usize::MAX;
                let mut end = 0;
                for frag in offsets.split(';') {
                    let mut nums = frag.split_whitespace().map(str::parse::<usize>);
                    match (nums.next(), nums.next()) {
                        (Some(Ok(s)), Some(Ok(e))) => {
                            start = start.min(s);
                            end = end.max(e);
                        }
                        _ => return Err(format_err(&where_, format!("bad offsets {offsets:?}"))),
                    }
                }
                entities.push(EntitySpan {
                    id: tag.to_string(),
                    start,
                    end,
                    surface: slice_chars(text, Span::new(start, end)).to_string(),
                });
            }
            Some('R') => {
                let body = cols.next().ok_or_else(|| format_err(&where_, "missing relation body"))?;
                let mut parts = body.split_whitespace();
                let label = parts.next().ok_or_else(|| format_err(&where_, "missing label"))?;
                let args: Vec<&str> = parts.filter_map(|a| a.split_once(':').map(|(_, v)| v)).collect();
                if args.len() != 2 {
                    return Err(format_err(&where_, "relation needs two arguments"));
                }
                relations.push(RelationTriple {
                    head: args[0].to_string(),
                    label: label.to_string(),
                    tail: args[1].to_string(),
                });
            }
            Some('E') => {
                let body = cols.next().ok_or_else(|| format_err(&where_, "missing event body"))?;
                let mut parts = body.split_whitespace();
                let trigger = parts
                    .next()
                    .and_then(|t| t.split_once(':').map(|(_, v)| v.to_string()))
                    .ok_or_else(|| format_err(&where_, "missing event trigger"))?;
                events.insert(tag.to_string(), trigger.clone());
                let args: Vec<(String, String)> = parts
                    .filter_map(|a| a.split_once(':').map(|(r, v)| (r.to_string(), v.to_string())))
                    .collect();
                event_lines.push((trigger, args));
            }
            _ => {}
        }
    }
    for (trigger, args) in event_lines {
        for (role, target) in args {
            let tail = events.get(&target).cloned().unwrap_or(target);
            relations.push(RelationTriple {
                head: trigger.clone(),
                label: role,
                tail,
            });
        }
    }
    let sentences = segment_context(text, segmenter)?;
    Ok(Document {
        id: id.to_string(),
        text: text.to_string(),
        sentences,
        entities,
        relations,
    })
}

fn bio(tag: &str) -> Option<bool> {
    // Some(true) = begin, Some(false) = inside, None = outside
    if tag == "O" {
        return None;
    }
    if tag.starts_with("B-") || tag.ends_with("-B") {
        Some(true)
    } else if tag.starts_with("I-") || tag.ends_with("-I") {
        Some(false)
    } else {
        None
    }
}

/// Build a document from an EFGC `.list`/`.flow` pair.
pub fn read_efgc_document(id: &str, list: &str, flow: &str) -> Result<Document, CorpusError> {
    type Addr = (u32, u32, u32);
    let mut text = String::new();
    let mut sentences = Vec::new();
    let mut entities: Vec<EntitySpan> = Vec::new();
    // word address -> entity index
    let mut word_entity: HashMap<Addr, usize> = HashMap::new();
    let mut current_sentence: Option<(u32, u32)> = None;
    let mut open: Option<usize> = None;
    let mut sentence_start = 0;
    let mut pos = 0; // in characters

    for (lineno, line) in list.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let where_ = format!("{id}.list:{}", lineno + 1);
        if cols.len() < 5 {
            return Err(format_err(&where_, "expected `step sentence word surface tag`"));
        }
        let num = |s: &str| s.parse::<u32>().map_err(|_| format_err(&where_, format!("bad index {s:?}")));
        let addr = (num(cols[0])?, num(cols[1])?, num(cols[2])?);
        let surface = cols[3];
        let tag = cols[4];
        if current_sentence != Some((addr.0, addr.1)) {
            if current_sentence.is_some() {
                sentences.push(Span::new(sentence_start, pos));
                text.push(' ');
                pos += 1;
            }
            current_sentence = Some((addr.0, addr.1));
            sentence_start = pos;
            open = None;
        } else {
            text.push(' ');
            pos += 1;
        }
        let start = pos;
        text.push_str(surface);
        pos += char_len(surface);
        match (bio(tag), open) {
            (Some(false), Some(idx)) => {
                let e = &mut entities[idx];
                e.end = pos;
                e.surface = slice_chars(&text, Span::new(e.start, e.end)).to_string();
                word_entity.insert(addr, idx);
            }
            (Some(_), _) => {
                entities.push(EntitySpan {
                    id: format!("{}-{}-{}", addr.0, addr.1, addr.2),
                    start,
                    end: pos,
                    surface: surface.to_string(),
                });
                word_entity.insert(addr, entities.len() - 1);
                open = Some(entities.len() - 1);
            }
            (None, _) => open = None,
        }
    }
    if current_sentence.is_some() {
        sentences.push(Span::new(sentence_start, pos));
    }

    let mut relations = Vec::new();
    for (lineno, line) in flow.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let where_ = format!("{id}.flow:{}", lineno + 1);
        let (head, tail, label) = match cols.len() {
            7 => (&cols[0..3], &cols[3..6], cols[6]),
            9 => (&cols[0..3], &cols[4..7], cols[8]),
            _ => return Err(format_err(&where_, "expected 7 or 9 columns")),
        };
        let addr = |c: &[&str]| -> Result<Addr, CorpusError> {
            let p = |s: &str| s.parse::<u32>().map_err(|_| format_err(&where_, format!("bad index {s:?}")));
            Ok((p(c[0])?, p(c[1])?, p(c[2])?))
        };
        let resolve = |a: Addr| -> String {
            word_entity
                .get(&a)
                .map(|&i| entities[i].id.clone())
                .unwrap_or_else(|| format!("{}-{}-{}", a.0, a.1, a.2))
        };
        relations.push(RelationTriple {
            head: resolve(addr(head)?),
            label: label.to_string(),
            tail: resolve(addr(tail)?),
        });
    }
    Ok(Document {
        id: id.to_string(),
        text,
        sentences,
        entities,
        relations,
    })
}

#[derive(Deserialize)]
struct GenericDocument {
    id: String,
    text: String,
    #[serde(default)]
    sentences: Option<Vec<Span>>,
    entities: Vec<EntitySpan>,
    relations: Vec<RelationTriple>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GenericFile {
    Many(Vec<GenericDocument>),
    One(GenericDocument),
}

/// Parse generic JSON documents, segmenting any that lack sentence spans.
pub fn read_generic_documents(
    json: &str,
    segmenter: &dyn SentenceSegmenter,
) -> Result<Vec<Document>, CorpusError> {
    let docs = match serde_json::from_str::<GenericFile>(json)? {
        GenericFile::Many(d) => d,
        GenericFile::One(d) => vec![d],
    };
    docs.into_iter()
        .map(|d| {
            let sentences = match d.sentences {
                Some(s) => s,
                None => segment_context(&d.text, segmenter)?,
            };
            Ok(Document {
                id: d.id,
                text: d.text,
                sentences,
                entities: d.entities,
                relations: d.relations,
            })
        })
        .collect()
}

/// Instances of one dataset, grouped by split.
#[derive(Debug, Clone)]
pub struct DatasetSplits {
    pub schema: LabelSchema,
    pub train: Vec<RelationInstance>,
    pub dev: Vec<RelationInstance>,
    pub test: Vec<RelationInstance>,
    /// True when the corpus had no dev split and one was carved from train.
    pub dev_generated: bool,
}

impl DatasetSplits {
    pub fn all(&self) -> impl Iterator<Item = &RelationInstance> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }

    pub fn manifest(&self) -> SplitManifest {
        let ids = |xs: &[RelationInstance]| xs.iter().map(|x| x.id.clone()).collect();
        SplitManifest {
            schema: self.schema.clone(),
            train: ids(&self.train),
            dev: ids(&self.dev),
            test: ids(&self.test),
            dev_generated: self.dev_generated,
        }
    }
}

/// Schema and split membership by instance id, stored next to the
/// instance JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema: LabelSchema,
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
    pub dev_generated: bool,
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

fn read_documents(
    dir: &Path,
    source: DocumentSource,
    segmenter: &dyn SentenceSegmenter,
) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    for path in sorted_files(dir)? {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let ext = path.extension().and_then(|s| s.to_str()).unwrap_or_default();
        match (source, ext) {
            (DocumentSource::Risec | DocumentSource::Mscorpus, "txt") => {
                let ann_path = path.with_extension("ann");
                if !ann_path.exists() {
                    continue;
                }
                let text = fs::read_to_string(&path)?;
                let ann = fs::read_to_string(&ann_path)?;
                docs.push(read_brat_document(&stem, &text, &ann, segmenter)?);
            }
            (DocumentSource::Efgc, "list") => {
                let flow_path = path.with_extension("flow");
                let list = fs::read_to_string(&path)?;
                let flow = if flow_path.exists() {
                    fs::read_to_string(&flow_path)?
                } else {
                    String::new()
                };
                docs.push(read_efgc_document(&stem, &list, &flow)?);
            }
            (DocumentSource::Generic, "json") => {
                docs.extend(read_generic_documents(&fs::read_to_string(&path)?, segmenter)?);
            }
            _ => {}
        }
    }
    Ok(docs)
}

fn instances_from(
    docs: &[Document],
    dataset: Dataset,
    schema: &LabelSchema,
) -> Result<Vec<RelationInstance>, CorpusError> {
    let mut out = Vec::new();
    for d in docs {
        out.extend(extract_instances(d, dataset, schema)?);
    }
    remap_labels(out, schema)
}

/// Load a corpus directory.
///
/// When `dir` has `train/`, `dev/` and `test/` subdirectories they are used as
/// given; a missing `dev/` is carved out of train 80/20 with `seed`. A flat
/// directory is treated as all-train (no test split). Without a merge map the
/// schema is the sorted set of observed labels.
pub fn load_dataset(
    dir: &Path,
    source: DocumentSource,
    merge_map: Option<BTreeMap<String, String>>,
    segmenter: &dyn SentenceSegmenter,
    seed: u64,
) -> Result<DatasetSplits, CorpusError> {
    let dataset = source.dataset();
    let has_splits = dir.join("train").is_dir();
    let (train_docs, dev_docs, test_docs) = if has_splits {
        let load = |name: &str| -> Result<Option<Vec<Document>>, CorpusError> {
            let sub = dir.join(name);
            if sub.is_dir() {
                Ok(Some(read_documents(&sub, source, segmenter)?))
            } else {
                Ok(None)
            }
        };
        (load("train")?.unwrap_or_default(), load("dev")?, load("test")?.unwrap_or_default())
    } else {
        (read_documents(dir, source, segmenter)?, None, Vec::new())
    };

    let schema = match merge_map {
        Some(m) => LabelSchema::from_merge_map(dataset.to_string(), m),
        None => {
            let mut labels: Vec<String> = train_docs
                .iter()
                .chain(dev_docs.iter().flatten())
                .chain(&test_docs)
                .flat_map(|d| d.relations.iter().map(|r| r.label.clone()))
                .collect();
            labels.sort();
            labels.dedup();
            LabelSchema::new(dataset.to_string(), labels)
        }
    };

    let train = instances_from(&train_docs, dataset, &schema)?;
    let test = instances_from(&test_docs, dataset, &schema)?;
    let (train, dev, dev_generated) = match dev_docs {
        Some(d) => (train, instances_from(&d, dataset, &schema)?, false),
        None => {
            let (t, d) = make_splits(&train, 0.2, seed)?;
            (t, d, true)
        }
    };
    let final_schema = LabelSchema {
        merge_map: None,
        ..schema
    };
    Ok(DatasetSplits {
        schema: final_schema,
        train,
        dev,
        test,
        dev_generated,
    })
}
