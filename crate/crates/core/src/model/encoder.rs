use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ndarray::Axis;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{Matrix, Vector};
use super::ModelError;
use crate::corpus::{tokenize_words, Span};

/// Per-context encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    /// `tokens × hidden`
    pub tokens: Matrix,
    /// Sequence summary vector (`[CLS]` for transformer encoders).
    pub context: Vector,
    /// Context character span of each token.
    pub offsets: Vec<Span>,
}

impl EncoderOutput {
    pub fn hidden(&self) -> usize {
        self.context.len()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Tokens whose span intersects `span`.
    pub fn tokens_for(&self, span: Span) -> Vec<usize> {
        self.offsets
            .iter()
            .enumerate()
            .filter(|(_, o)| o.intersects(&span))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Which encoder a model uses; recorded in checkpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncoderSpec {
    /// Trainable hashed-vocabulary embedding table over word tokens.
    Tiny {
        vocab_size: usize,
        hidden: usize,
        max_tokens: usize,
    },
    /// Outputs supplied externally (e.g. dumped from a transformer); the
    /// encoder is not trained here, but its size is still reported.
    Precomputed {
        name: String,
        hidden: usize,
        max_tokens: usize,
        parameter_count: u64,
    },
}

impl EncoderSpec {
    pub fn tiny(hidden: usize) -> Self {
        EncoderSpec::Tiny {
            vocab_size: 1024,
            hidden,
            max_tokens: 256,
        }
    }

    pub fn bert_base_uncased() -> Self {
        EncoderSpec::Precomputed {
            name: "bert-base-uncased".into(),
            hidden: 768,
            max_tokens: 512,
            parameter_count: transformer_parameter_count(&TransformerShape::BERT_BASE_UNCASED),
        }
    }

    pub fn hidden(&self) -> usize {
        match self {
            EncoderSpec::Tiny { hidden, .. } | EncoderSpec::Precomputed { hidden, .. } => *hidden,
        }
    }

    pub fn max_tokens(&self) -> usize {
        match self {
            EncoderSpec::Tiny { max_tokens, .. } | EncoderSpec::Precomputed { max_tokens, .. } => *max_tokens,
        }
    }

    pub fn parameter_count(&self) -> u64 {
        match self {
            EncoderSpec::Tiny { vocab_size, hidden, .. } => (vocab_size * hidden) as u64,
            EncoderSpec::Precomputed { parameter_count, .. } => *parameter_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformerShape {
    pub vocab: u64,
    pub hidden: u64,
    pub layers: u64,
    pub intermediate: u64,
    pub max_positions: u64,
    pub type_vocab: u64,
}

impl TransformerShape {
    pub const BERT_BASE_UNCASED: TransformerShape = TransformerShape {
        vocab: 30522,
        hidden: 768,
        layers: 12,
        intermediate: 3072,
        max_positions: 512,
        type_vocab: 2,
    };
}

/// Parameters of a BERT-style encoder including the pooler.
pub fn transformer_parameter_count(s: &TransformerShape) -> u64 {
    let h = s.hidden;
    let embeddings = (s.vocab + s.max_positions + s.type_vocab) * h + 2 * h;
    let attention = 4 * (h * h + h) + 2 * h;
    let feed_forward = (h * s.intermediate + s.intermediate) + (s.intermediate * h + h) + 2 * h;
    let pooler = h * h + h;
    embeddings + s.layers * (attention + feed_forward) + pooler
}

/// Encoder input after tokenization.
#[derive(Debug, Clone, PartialEq)]
pub enum Encoding {
    /// Vocabulary ids for the tiny encoder.
    Ids { ids: Vec<usize>, offsets: Vec<Span> },
    Fixed(EncoderOutput),
}

impl Encoding {
    pub fn offsets(&self) -> &[Span] {
        match self {
            Encoding::Ids { offsets, .. } => offsets,
            Encoding::Fixed(out) => &out.offsets,
        }
    }
}

/// Turns a context string into encoder input.
pub trait EncoderAdapter {
    fn spec(&self) -> EncoderSpec;
    fn encode_context(&self, context: &str) -> Result<Encoding, ModelError>;
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Tokenizer for [`TinyEncoder`]: lowercased canonical word tokens hashed
/// into a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TinyTokenizer {
    pub vocab_size: usize,
    pub max_tokens: usize,
}

impl TinyTokenizer {
    pub fn from_spec(spec: &EncoderSpec) -> Option<Self> {
        match spec {
            EncoderSpec::Tiny {
                vocab_size, max_tokens, ..
            } => Some(TinyTokenizer {
                vocab_size: *vocab_size,
                max_tokens: *max_tokens,
            }),
            _ => None,
        }
    }

    pub fn id(&self, word: &str) -> usize {
        (fnv1a(&word.to_lowercase()) % self.vocab_size as u64) as usize
    }
}

/// Adapter pairing a [`TinyTokenizer`] with the hidden width.
#[derive(Debug, Clone)]
pub struct TinyAdapter {
    pub tokenizer: TinyTokenizer,
    pub hidden: usize,
}

impl TinyAdapter {
    pub fn new(spec: &EncoderSpec) -> Option<Self> {
        Some(TinyAdapter {
            tokenizer: TinyTokenizer::from_spec(spec)?,
            hidden: spec.hidden(),
        })
    }
}

impl EncoderAdapter for TinyAdapter {
    fn spec(&self) -> EncoderSpec {
        EncoderSpec::Tiny {
            vocab_size: self.tokenizer.vocab_size,
            hidden: self.hidden,
            max_tokens: self.tokenizer.max_tokens,
        }
    }

    fn encode_context(&self, context: &str) -> Result<Encoding, ModelError> {
        let mut toks = tokenize_words(context);
        toks.truncate(self.tokenizer.max_tokens);
        Ok(Encoding::Ids {
            ids: toks.iter().map(|t| self.tokenizer.id(&t.text)).collect(),
            offsets: toks.iter().map(|t| t.span).collect(),
        })
    }
}

/// Trainable embedding table; the context vector is the mean token embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyEncoder {
    /// `vocab × hidden`
    pub embeddings: Matrix,
}

impl TinyEncoder {
    pub fn new(vocab_size: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        TinyEncoder {
            embeddings: Matrix::from_shape_fn((vocab_size, hidden), |_| rng.gen_range(-0.5..0.5)),
        }
    }

    pub fn zeros(vocab_size: usize, hidden: usize) -> Self {
        TinyEncoder {
            embeddings: Matrix::zeros((vocab_size, hidden)),
        }
    }

    pub fn forward(&self, ids: &[usize], offsets: &[Span]) -> EncoderOutput {
        let tokens = self.embeddings.select(Axis(0), ids);
        let context = if ids.is_empty() {
            Vector::zeros(self.embeddings.ncols())
        } else {
            tokens.mean_axis(Axis(0)).expect("nonempty")
        };
        EncoderOutput {
            tokens,
            context,
            offsets: offsets.to_vec(),
        }
    }

    /// Accumulate `dL/dE` given gradients wrt the token matrix and context.
    pub fn backward(&self, ids: &[usize], dtokens: &Matrix, dcontext: &Vector, grad: &mut TinyEncoder) {
        if ids.is_empty() {
            return;
        }
        let share = dcontext / ids.len() as f64;
        for (t, &id) in ids.iter().enumerate() {
            let mut row = grad.embeddings.row_mut(id);
            row += &dtokens.row(t);
            row += &share;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PrecomputedRecord {
    context: String,
    tokens: Vec<Vec<f64>>,
    context_embedding: Vec<f64>,
    offsets: Vec<Span>,
}

/// Encoder outputs read from a JSONL dump keyed by context string. Each
/// line holds `context`, `tokens` (rows), `context_embedding`, `offsets`.
#[derive(Debug, Clone)]
pub struct PrecomputedEncoder {
    pub spec: EncoderSpec,
    outputs: HashMap<String, EncoderOutput>,
}

impl PrecomputedEncoder {
    pub fn new(spec: EncoderSpec) -> Self {
        PrecomputedEncoder {
            spec,
            outputs: HashMap::new(),
        }
    }

    pub fn insert(&mut self, context: impl Into<String>, output: EncoderOutput) -> Result<(), ModelError> {
        if output.hidden() != self.spec.hidden() || output.tokens.ncols() != self.spec.hidden() {
            return Err(ModelError::Shape(format!(
                "encoder output width {} != {}",
                output.hidden(),
                self.spec.hidden()
            )));
        }
        if output.tokens.nrows() != output.offsets.len() {
            return Err(ModelError::Shape("token rows and offsets differ in length".into()));
        }
        self.outputs.insert(context.into(), output);
        Ok(())
    }

    pub fn load(spec: EncoderSpec, path: &Path) -> Result<Self, ModelError> {
        let mut enc = PrecomputedEncoder::new(spec);
        let text = fs::read_to_string(path)?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: PrecomputedRecord = serde_json::from_str(line)
                .map_err(|e| ModelError::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
            let rows = rec.tokens.len();
            let flat: Vec<f64> = rec.tokens.into_iter().flatten().collect();
            let hidden = flat.len().checked_div(rows).unwrap_or(enc.spec.hidden());
            let tokens = Matrix::from_shape_vec((rows, hidden), flat)
                .map_err(|e| ModelError::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
            enc.insert(
                rec.context,
                EncoderOutput {
                    tokens,
                    context: Vector::from(rec.context_embedding),
                    offsets: rec.offsets,
                },
            )?;
        }
        Ok(enc)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

impl EncoderAdapter for PrecomputedEncoder {
    fn spec(&self) -> EncoderSpec {
        self.spec.clone()
    }

    fn encode_context(&self, context: &str) -> Result<Encoding, ModelError> {
        let out = self
            .outputs
            .get(context)
            .ok_or_else(|| ModelError::MissingEncoding(context.chars().take(60).collect()))?;
        let max = self.spec.max_tokens();
        if out.len() <= max {
            return Ok(Encoding::Fixed(out.clone()));
        }
        Ok(Encoding::Fixed(EncoderOutput {
            tokens: out.tokens.slice(ndarray::s![..max, ..]).to_owned(),
            context: out.context.clone(),
            offsets: out.offsets[..max].to_vec(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bert_base_size() {
        assert_eq!(transformer_parameter_count(&TransformerShape::BERT_BASE_UNCASED), 109_482_240);
    }

    #[test]
    fn tiny_tokenizer_is_case_insensitive_and_truncates() {
        let a = TinyAdapter::new(&EncoderSpec::Tiny {
            vocab_size: 50,
            hidden: 4,
            max_tokens: 3,
        })
        .unwrap();
        let Encoding::Ids { ids, offsets } = a.encode_context("Boil boil the water now").unwrap() else {
            panic!()
        };
        assert_eq!(ids.len(), 3);
        assert_eq!(ids[0], ids[1]);
        assert_eq!(offsets[2], Span::new(10, 13));
    }

    #[test]
    fn tiny_context_is_mean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let enc = TinyEncoder::new(10, 3, &mut rng);
        let out = enc.forward(&[1, 4], &[Span::new(0, 1), Span::new(2, 3)]);
        let mean = (&enc.embeddings.row(1) + &enc.embeddings.row(4)) / 2.0;
        assert_eq!(out.context, mean);
        assert_eq!(out.tokens.row(1), enc.embeddings.row(4));
    }
}
