//! Relation classifiers: a text-only baseline and a graph-aware variant.
//!
//! Both pool the encoder's token embeddings over each entity (max), append
//! the context vector and feed the result to a two-layer tanh MLP. The
//! graph-aware model first seeds graph nodes with the embeddings of their
//! aligned tokens, runs a relational convolution, and adds each entity's
//! mean node embedding back onto that entity's aligned tokens.

mod checkpoint;
mod encoder;
mod fusion;
mod layers;
mod rgcn;

use std::collections::HashMap;

use ndarray::s;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize_words, RelationInstance, Span};
use crate::linggraph::{Formalism, LinguisticGraph};

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use encoder::{
    transformer_parameter_count, EncoderAdapter, EncoderOutput, EncoderSpec, Encoding, PrecomputedEncoder,
    TinyAdapter, TinyEncoder, TinyTokenizer, TransformerShape,
};
pub use fusion::{aligned_entity_tokens, entity_nodes, init_node_features, mean_nodes, pool_entity, residual_fuse};
pub use layers::{concat, softmax, xavier, Dense, Matrix, MlpHead, Vector};
pub use rgcn::{RelConv, RelConvLayer, RelEdge, RelationWeights};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance {instance}: entity has no tokens after truncation")]
    Truncation { instance: String },
    #[error("unknown relation: {0}")]
    UnknownRelation(String),
    #[error("instance {instance}: graph formalism {found:?} does not match model graph mode {expected:?}")]
    GraphModeMismatch {
        instance: String,
        expected: GraphMode,
        found: Formalism,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no encoder output for context {0:?}")]
    MissingEncoding(String),
    #[error("{0}")]
    Format(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    None,
    Dependency,
    Amr,
}

impl GraphMode {
    pub fn formalism(self) -> Option<Formalism> {
        match self {
            GraphMode::None => None,
            GraphMode::Dependency => Some(Formalism::Dependency),
            GraphMode::Amr => Some(Formalism::Amr),
        }
    }
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GraphMode::None => "none",
            GraphMode::Dependency => "dependency",
            GraphMode::Amr => "amr",
        })
    }
}

impl std::str::FromStr for GraphMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "baseline" | "plaintext" => Ok(GraphMode::None),
            "dependency" | "dep" => Ok(GraphMode::Dependency),
            "amr" => Ok(GraphMode::Amr),
            _ => Err(format!("unknown graph mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub encoder: EncoderSpec,
    pub num_classes: usize,
    pub graph_mode: GraphMode,
    pub depth: usize,
    /// Edge labels in the base relation vocabulary; ignored without a graph.
    pub relation_vocabulary: Vec<String>,
    /// Share relation transforms through this many bases.
    pub num_bases: Option<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl ClassifierConfig {
    pub fn new(encoder: EncoderSpec, num_classes: usize, graph_mode: GraphMode, relation_vocabulary: Vec<String>) -> Self {
        ClassifierConfig {
            encoder,
            num_classes,
            graph_mode,
            depth: 4,
            relation_vocabulary: if graph_mode == GraphMode::None {
                Vec::new()
            } else {
                relation_vocabulary
            },
            num_bases: None,
            learning_rate: 2e-5,
            batch_size: 16,
        }
    }

    pub fn hidden(&self) -> usize {
        self.encoder.hidden()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.depth == 0 {
            return Err(ModelError::Config("depth must be at least 1".into()));
        }
        if self.num_classes == 0 || self.hidden() == 0 {
            return Err(ModelError::Config("classes and hidden size must be positive".into()));
        }
        if self.num_bases == Some(0) {
            return Err(ModelError::Config("basis count must be positive".into()));
        }
        Ok(())
    }

    pub fn relation_index(&self) -> HashMap<String, usize> {
        self.relation_vocabulary
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    /// Present only for the trainable tiny encoder.
    pub encoder: Option<TinyEncoder>,
    pub conv: Option<RelConv>,
    pub head: MlpHead,
}

/// A flat view of one parameter tensor.
pub struct TensorRef<'a> {
    pub path: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

pub struct TensorMut<'a> {
    pub path: String,
    pub shape: Vec<usize>,
    pub data: &'a mut [f64],
}

fn tref<'a, D: ndarray::Dimension>(path: String, a: &'a ndarray::Array<f64, D>) -> TensorRef<'a> {
    TensorRef {
        path,
        shape: a.shape().to_vec(),
        data: a.as_slice().expect("parameters are contiguous"),
    }
}

fn tmut<'a, D: ndarray::Dimension>(path: String, a: &'a mut ndarray::Array<f64, D>) -> TensorMut<'a> {
    TensorMut {
        path,
        shape: a.shape().to_vec(),
        data: a.as_slice_mut().expect("parameters are contiguous"),
    }
}

impl ModelParameters {
    pub fn init(config: &ClassifierConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = config.hidden();
        let encoder = match &config.encoder {
            EncoderSpec::Tiny { vocab_size, hidden, .. } => Some(TinyEncoder::new(*vocab_size, *hidden, &mut rng)),
            EncoderSpec::Precomputed { .. } => None,
        };
        let conv = (config.graph_mode != GraphMode::None)
            .then(|| RelConv::new(h, config.depth, config.relation_vocabulary.len(), config.num_bases, &mut rng));
        let head = MlpHead::new(3 * h, h, config.num_classes, &mut rng);
        Ok(ModelParameters { encoder, conv, head })
    }

    pub fn zeros(config: &ClassifierConfig) -> Self {
        let h = config.hidden();
        ModelParameters {
            encoder: match &config.encoder {
                EncoderSpec::Tiny { vocab_size, hidden, .. } => Some(TinyEncoder::zeros(*vocab_size, *hidden)),
                EncoderSpec::Precomputed { .. } => None,
            },
            conv: (config.graph_mode != GraphMode::None)
                .then(|| RelConv::zeros(h, config.depth, config.relation_vocabulary.len(), config.num_bases)),
            head: MlpHead::zeros(3 * h, h, config.num_classes),
        }
    }

    /// Same layout with every entry zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.fill(0.0);
        }
        z
    }

    /// Every tensor keyed by component path, in a fixed order.
    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        if let Some(enc) = &self.encoder {
            out.push(tref("encoder.embeddings".into(), &enc.embeddings));
        }
        if let Some(conv) = &self.conv {
            for (l, layer) in conv.layers.iter().enumerate() {
                out.push(tref(format!("conv.layer{l}.self_weight"), &layer.self_weight));
                out.push(tref(format!("conv.layer{l}.bias"), &layer.bias));
                for (name, m) in layer.relations.tensors() {
                    out.push(tref(format!("conv.layer{l}.{name}"), m));
                }
            }
        }
        let h = &self.head;
        out.push(tref("head.hidden.weight".into(), &h.hidden.weight));
        out.push(tref("head.hidden.bias".into(), &h.hidden.bias));
        out.push(tref("head.output.weight".into(), &h.output.weight));
        out.push(tref("head.output.bias".into(), &h.output.bias));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::new();
        if let Some(enc) = &mut self.encoder {
            out.push(tmut("encoder.embeddings".into(), &mut enc.embeddings));
        }
        if let Some(conv) = &mut self.conv {
            for (l, layer) in conv.layers.iter_mut().enumerate() {
                out.push(tmut(format!("conv.layer{l}.self_weight"), &mut layer.self_weight));
                out.push(tmut(format!("conv.layer{l}.bias"), &mut layer.bias));
                for (name, m) in layer.relations.tensors_mut() {
                    out.push(tmut(format!("conv.layer{l}.{name}"), m));
                }
            }
        }
        let h = &mut self.head;
        out.push(tmut("head.hidden.weight".into(), &mut h.hidden.weight));
        out.push(tmut("head.hidden.bias".into(), &mut h.hidden.bias));
        out.push(tmut("head.output.weight".into(), &mut h.output.weight));
        out.push(tmut("head.output.bias".into(), &mut h.output.bias));
        out
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|x| x.is_finite()))
    }
}

/// A graph in encoder-token space, ready for convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInput {
    pub num_nodes: usize,
    pub edges: Vec<RelEdge>,
    /// Encoder tokens aligned to each node.
    pub node_tokens: Vec<Vec<usize>>,
}

impl GraphInput {
    /// A lone top node: what a context without any parse contributes.
    pub fn parseless() -> Self {
        GraphInput {
            num_nodes: 1,
            edges: Vec::new(),
            node_tokens: vec![Vec::new()],
        }
    }
}

/// Character spans of `words` found left to right in `context`, ignoring case.
pub fn locate_words(context: &str, words: &[String]) -> Vec<Option<Span>> {
    let chars: Vec<char> = context.chars().collect();
    let mut cursor = 0;
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let needle: Vec<char> = w.chars().collect();
        let found = if needle.is_empty() || needle.len() > chars.len() {
            None
        } else {
            (cursor..=chars.len() - needle.len()).find(|&i| {
                chars[i..i + needle.len()]
                    .iter()
                    .zip(&needle)
                    .all(|(a, b)| a.to_lowercase().eq(b.to_lowercase()))
            })
        };
        match found {
            Some(i) => {
                out.push(Some(Span::new(i, i + needle.len())));
                cursor = i + needle.len();
            }
            None => out.push(None),
        }
    }
    out
}

/// Map a graph's token alignments onto encoder tokens and its edge labels
/// onto relation ids.
///
/// Graph token `i` is located in the context by its surface form; graphs
/// without a token list are assumed to use the canonical word tokenization.
pub fn graph_input(
    graph: &LinguisticGraph,
    context: &str,
    offsets: &[Span],
    relations: &HashMap<String, usize>,
) -> Result<GraphInput, ModelError> {
    let word_spans: Vec<Option<Span>> = if graph.tokens.is_empty() {
        tokenize_words(context).into_iter().map(|t| Some(t.span)).collect()
    } else {
        locate_words(context, &graph.tokens)
    };
    let mut node_tokens = vec![Vec::new(); graph.num_nodes()];
    for (&node, words) in &graph.alignments {
        if node >= graph.num_nodes() {
            return Err(ModelError::Shape(format!("alignment for missing node {node}")));
        }
        let spans: Vec<Span> = words.iter().filter_map(|&w| word_spans.get(w).copied().flatten()).collect();
        node_tokens[node] = offsets
            .iter()
            .enumerate()
            .filter(|(_, o)| spans.iter().any(|s| s.intersects(o)))
            .map(|(i, _)| i)
            .collect();
    }
    let edges = graph
        .edges
        .iter()
        .map(|e| {
            relations
                .get(&e.rel)
                .map(|&rel| RelEdge {
                    src: e.src,
                    dst: e.dst,
                    rel,
                })
                .ok_or_else(|| ModelError::UnknownRelation(e.rel.clone()))
        })
        .collect::<Result<_, _>>()?;
    Ok(GraphInput {
        num_nodes: graph.num_nodes(),
        edges,
        node_tokens,
    })
}

/// One instance tokenized and aligned for a particular model.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedInstance {
    pub id: String,
    pub label: Option<usize>,
    pub encoding: Encoding,
    pub e1: Vec<usize>,
    pub e2: Vec<usize>,
    pub graph: Option<GraphInput>,
}

/// Tokenize `instance`, locate its entities among the encoder tokens and,
/// for graph models, map its graph (a missing graph counts as parseless).
pub fn prepare_instance(
    instance: &RelationInstance,
    label: Option<usize>,
    graph: Option<&LinguisticGraph>,
    adapter: &dyn EncoderAdapter,
    config: &ClassifierConfig,
    relations: &HashMap<String, usize>,
) -> Result<PreparedInstance, ModelError> {
    let encoding = adapter.encode_context(&instance.context)?;
    let offsets = encoding.offsets().to_vec();
    let within = |span: Span| -> Vec<usize> {
        offsets
            .iter()
            .enumerate()
            .filter(|(_, o)| o.intersects(&span))
            .map(|(i, _)| i)
            .collect()
    };
    let e1 = within(instance.e1_span);
    let e2 = within(instance.e2_span);
    if e1.is_empty() || e2.is_empty() {
        return Err(ModelError::Truncation {
            instance: instance.id.clone(),
        });
    }
    let graph = match config.graph_mode.formalism() {
        None => None,
        Some(formalism) => Some(match graph {
            None => GraphInput::parseless(),
            Some(g) if g.formalism != formalism => {
                return Err(ModelError::GraphModeMismatch {
                    instance: instance.id.clone(),
                    expected: config.graph_mode,
                    found: g.formalism,
                })
            }
            Some(g) if g.parseless => GraphInput::parseless(),
            Some(g) => graph_input(g, &instance.context, &offsets, relations)?,
        }),
    };
    Ok(PreparedInstance {
        id: instance.id.clone(),
        label,
        encoding,
        e1,
        e2,
        graph,
    })
}

/// Class distribution from encoder output alone.
pub fn baseline_forward(
    enc: &EncoderOutput,
    e1: &[usize],
    e2: &[usize],
    head: &MlpHead,
    instance: &str,
) -> Result<Vector, ModelError> {
    let p1 = pool_entity(&enc.tokens, e1, instance)?;
    let p2 = pool_entity(&enc.tokens, e2, instance)?;
    let (logits, _) = head.logits(&concat(&[&p1, &p2, &enc.context]));
    Ok(softmax(&logits))
}

/// Class distribution after fusing graph information into entity tokens.
pub fn graph_forward(
    enc: &EncoderOutput,
    graph: &GraphInput,
    e1: &[usize],
    e2: &[usize],
    conv: &RelConv,
    head: &MlpHead,
    instance: &str,
) -> Result<Vector, ModelError> {
    let fused = fuse(enc, graph, e1, e2, conv)?.tokens;
    let p1 = pool_entity(&fused, e1, instance)?;
    let p2 = pool_entity(&fused, e2, instance)?;
    let (logits, _) = head.logits(&concat(&[&p1, &p2, &enc.context]));
    Ok(softmax(&logits))
}

struct Fused {
    tokens: Matrix,
    node_args: Vec<Option<Vec<usize>>>,
    conv_cache: rgcn::ConvCache,
    groups: [(Vec<usize>, Vec<usize>); 2],
}

fn fuse(enc: &EncoderOutput, graph: &GraphInput, e1: &[usize], e2: &[usize], conv: &RelConv) -> Result<Fused, ModelError> {
    if graph.node_tokens.len() != graph.num_nodes {
        return Err(ModelError::Shape("node alignment table does not cover the graph".into()));
    }
    let (x0, node_args) = init_node_features(&enc.tokens, &graph.node_tokens);
    let (nodes, conv_cache) = conv.forward_cached(&x0, &graph.edges)?;
    let n1 = entity_nodes(&graph.node_tokens, e1);
    let n2 = entity_nodes(&graph.node_tokens, e2);
    let a1 = aligned_entity_tokens(&graph.node_tokens, &n1, e1);
    let a2 = aligned_entity_tokens(&graph.node_tokens, &n2, e2);
    let tokens = residual_fuse(&enc.tokens, &nodes, &n1, &n2, &a1, &a2);
    Ok(Fused {
        tokens,
        node_args,
        conv_cache,
        groups: [(n1, a1), (n2, a2)],
    })
}

/// Trainable-scalar counts per component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterCount {
    pub encoder: u64,
    pub graph: u64,
    pub head: u64,
}

impl ParameterCount {
    pub fn total(&self) -> u64 {
        self.encoder + self.graph + self.head
    }
}

/// Counts implied by a configuration; nothing is allocated, so this works
/// for full-size encoders.
pub fn count_parameters_for(config: &ClassifierConfig) -> ParameterCount {
    let h = config.hidden() as u64;
    let c = config.num_classes as u64;
    let graph = if config.graph_mode == GraphMode::None {
        0
    } else {
        let r = 2 * config.relation_vocabulary.len() as u64;
        let relations = match config.num_bases {
            None => r * h * h,
            Some(b) => b as u64 * h * h + r * b as u64,
        };
        config.depth as u64 * (h * h + h + relations)
    };
    ParameterCount {
        encoder: config.encoder.parameter_count(),
        graph,
        head: 3 * h * h + h + h * c + c,
    }
}

/// Exact counts of allocated parameters. An external encoder reports the
/// size recorded in its spec.
pub fn count_parameters(config: &ClassifierConfig, params: &ModelParameters) -> ParameterCount {
    ParameterCount {
        encoder: match &params.encoder {
            Some(e) => e.embeddings.len() as u64,
            None => config.encoder.parameter_count(),
        },
        graph: params.conv.as_ref().map_or(0, |c| c.parameter_count() as u64),
        head: params.head.parameter_count() as u64,
    }
}

/// A model: configuration plus weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub config: ClassifierConfig,
    pub params: ModelParameters,
}

struct ForwardCache {
    encoder_out: EncoderOutput,
    fused: Option<Fused>,
    args: [Vec<usize>; 2],
    head: layers::HeadCache,
}

impl Classifier {
    pub fn new(config: ClassifierConfig, seed: u64) -> Result<Self, ModelError> {
        let params = ModelParameters::init(&config, seed)?;
        Ok(Classifier { config, params })
    }

    pub fn relation_index(&self) -> HashMap<String, usize> {
        self.config.relation_index()
    }

    pub fn encode(&self, x: &PreparedInstance) -> Result<EncoderOutput, ModelError> {
        match (&x.encoding, &self.params.encoder) {
            (Encoding::Ids { ids, offsets }, Some(enc)) => Ok(enc.forward(ids, offsets)),
            (Encoding::Fixed(out), None) => {
                if out.hidden() != self.config.hidden() {
                    return Err(ModelError::Shape(format!(
                        "instance {}: encoder width {} != {}",
                        x.id,
                        out.hidden(),
                        self.config.hidden()
                    )));
                }
                Ok(out.clone())
            }
            _ => Err(ModelError::Shape(format!("instance {}: encoding does not fit the encoder", x.id))),
        }
    }

    fn run(&self, x: &PreparedInstance) -> Result<(Vector, ForwardCache), ModelError> {
        let enc = self.encode(x)?;
        let fused = match (&x.graph, &self.params.conv) {
            (Some(g), Some(conv)) => Some(fuse(&enc, g, &x.e1, &x.e2, conv)?),
            (None, None) => None,
            _ => {
                return Err(ModelError::Shape(format!(
                    "instance {}: prepared for a different graph mode",
                    x.id
                )))
            }
        };
        let tokens = fused.as_ref().map_or(&enc.tokens, |f| &f.tokens);
        if x.e1.is_empty() || x.e2.is_empty() {
            return Err(ModelError::Truncation { instance: x.id.clone() });
        }
        let (p1, a1) = fusion::max_pool(tokens, &x.e1);
        let (p2, a2) = fusion::max_pool(tokens, &x.e2);
        let (logits, head) = self.params.head.logits(&concat(&[&p1, &p2, &enc.context]));
        Ok((
            logits,
            ForwardCache {
                encoder_out: enc,
                fused,
                args: [a1, a2],
                head,
            },
        ))
    }

    pub fn logits(&self, x: &PreparedInstance) -> Result<Vector, ModelError> {
        Ok(self.run(x)?.0)
    }

    pub fn probabilities(&self, x: &PreparedInstance) -> Result<Vector, ModelError> {
        Ok(softmax(&self.logits(x)?))
    }

    pub fn predict(&self, x: &PreparedInstance) -> Result<usize, ModelError> {
        let l = self.logits(x)?;
        Ok(argmax(&l))
    }

    /// Cross-entropy of `label`; parameter gradients are added to `grad`.
    pub fn loss_and_gradient(
        &self,
        x: &PreparedInstance,
        label: usize,
        grad: &mut ModelParameters,
    ) -> Result<f64, ModelError> {
        let (logits, cache) = self.run(x)?;
        if label >= logits.len() {
            return Err(ModelError::Shape(format!("label {label} outside {} classes", logits.len())));
        }
        let max = logits.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let loss = max + logits.mapv(|x| (x - max).exp()).sum().ln() - logits[label];
        let probs = softmax(&logits);
        let mut dlogits = probs;
        dlogits[label] -= 1.0;
        self.backward(x, &cache, &dlogits, grad);
        Ok(loss)
    }

    fn backward(&self, x: &PreparedInstance, cache: &ForwardCache, dlogits: &Vector, grad: &mut ModelParameters) {
        let h = self.config.hidden();
        let dz = self.params.head.backward(&cache.head, dlogits, &mut grad.head);
        let dctx = dz.slice(s![2 * h..]).to_owned();
        let enc = &cache.encoder_out;
        let mut dfused = Matrix::zeros(enc.tokens.raw_dim());
        for (part, args) in cache.args.iter().enumerate() {
            for (k, &t) in args.iter().enumerate() {
                dfused[[t, k]] += dz[part * h + k];
            }
        }
        let dtokens = match (&cache.fused, &self.params.conv, &mut grad.conv) {
            (Some(f), Some(conv), Some(gconv)) => {
                let mut dnodes = Matrix::zeros((f.node_args.len(), h));
                for (nodes, toks) in &f.groups {
                    if nodes.is_empty() {
                        continue;
                    }
                    let mut g = Vector::zeros(h);
                    for &t in toks {
                        g += &dfused.row(t);
                    }
                    g /= nodes.len() as f64;
                    for &n in nodes {
                        let mut row = dnodes.row_mut(n);
                        row += &g;
                    }
                }
                let dx0 = conv.backward(&f.conv_cache, &dnodes, gconv);
                let mut dt = dfused;
                for (n, args) in f.node_args.iter().enumerate() {
                    if let Some(args) = args {
                        for (k, &t) in args.iter().enumerate() {
                            dt[[t, k]] += dx0[[n, k]];
                        }
                    }
                }
                dt
            }
            _ => dfused,
        };
        if let (Encoding::Ids { ids, .. }, Some(encoder), Some(genc)) =
            (&x.encoding, &self.params.encoder, &mut grad.encoder)
        {
            encoder.backward(ids, &dtokens, &dctx, genc);
        }
    }
}

pub fn argmax(v: &Vector) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
