use ndarray::Axis;
use rand::Rng;

use super::layers::{outer_add, xavier, Matrix, Vector};
use super::ModelError;

/// A labeled edge with its relation id in the base vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelEdge {
    pub src: usize,
    pub dst: usize,
    pub rel: usize,
}

/// Per-relation transforms, either independent or combined from shared bases.
#[derive(Debug, Clone, PartialEq)]
pub enum RelationWeights {
    Full(Vec<Matrix>),
    Basis {
        bases: Vec<Matrix>,
        /// `relations × bases`
        coefficients: Matrix,
    },
}

impl RelationWeights {
    pub fn num_relations(&self) -> usize {
        match self {
            RelationWeights::Full(ws) => ws.len(),
            RelationWeights::Basis { coefficients, .. } => coefficients.nrows(),
        }
    }

    fn matrix(&self, r: usize) -> Matrix {
        match self {
            RelationWeights::Full(ws) => ws[r].clone(),
            RelationWeights::Basis { bases, coefficients } => {
                let mut m = Matrix::zeros(bases[0].raw_dim());
                for (b, v) in bases.iter().enumerate() {
                    m.scaled_add(coefficients[[r, b]], v);
                }
                m
            }
        }
    }

    /// Accumulate the gradient wrt the effective matrix `W_r`.
    fn accumulate(&self, r: usize, g: &Matrix, grad: &mut RelationWeights) {
        match (self, grad) {
            (RelationWeights::Full(_), RelationWeights::Full(gs)) => gs[r] += g,
            (RelationWeights::Basis { bases, coefficients }, RelationWeights::Basis { bases: gb, coefficients: gc }) => {
                for (b, v) in bases.iter().enumerate() {
                    gb[b].scaled_add(coefficients[[r, b]], g);
                    gc[[r, b]] += (v * g).sum();
                }
            }
            _ => unreachable!("gradient layout matches parameters"),
        }
    }

    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        match self {
            RelationWeights::Full(ws) => ws.iter().enumerate().map(|(r, w)| (format!("rel.{r}"), w)).collect(),
            RelationWeights::Basis { bases, coefficients } => {
                let mut v: Vec<(String, &Matrix)> =
                    bases.iter().enumerate().map(|(b, w)| (format!("basis.{b}"), w)).collect();
                v.push(("coefficients".into(), coefficients));
                v
            }
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        match self {
            RelationWeights::Full(ws) => ws.iter_mut().enumerate().map(|(r, w)| (format!("rel.{r}"), w)).collect(),
            RelationWeights::Basis { bases, coefficients } => {
                let mut v: Vec<(String, &mut Matrix)> =
                    bases.iter_mut().enumerate().map(|(b, w)| (format!("basis.{b}"), w)).collect();
                v.push(("coefficients".into(), coefficients));
                v
            }
        }
    }
}

/// One relational convolution layer:
/// `h'_i = W_0 h_i + b + Σ_r Σ_{j ∈ N_i^r} W_r h_j / c_{i,r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelConvLayer {
    pub self_weight: Matrix,
    pub bias: Vector,
    pub relations: RelationWeights,
}

/// Stacked layers with ReLU between them (none after the last).
///
/// Relation ids `0..L` are the base vocabulary in edge direction; ids
/// `L..2L` carry the same labels against the edge direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RelConv {
    pub layers: Vec<RelConvLayer>,
    pub base_relations: usize,
}

struct Message {
    target: usize,
    source: usize,
    rel: usize,
    norm: f64,
}

fn messages(num_nodes: usize, edges: &[RelEdge], base: usize) -> Result<Vec<Message>, ModelError> {
    let mut raw = Vec::with_capacity(edges.len() * 2);
    for e in edges {
        if e.rel >= base {
            return Err(ModelError::UnknownRelation(format!("relation id {} (vocabulary size {base})", e.rel)));
        }
        if e.src >= num_nodes || e.dst >= num_nodes {
            return Err(ModelError::Shape(format!("edge {}->{} outside {num_nodes} nodes", e.src, e.dst)));
        }
        raw.push((e.dst, e.src, e.rel));
        raw.push((e.src, e.dst, e.rel + base));
    }
    let mut counts = std::collections::HashMap::new();
    for &(t, _, r) in &raw {
        *counts.entry((t, r)).or_insert(0usize) += 1;
    }
    Ok(raw
        .into_iter()
        .map(|(target, source, rel)| Message {
            target,
            source,
            rel,
            norm: 1.0 / counts[&(target, rel)] as f64,
        })
        .collect())
}

pub struct ConvCache {
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    messages: Vec<Message>,
}

impl RelConv {
    pub fn new(
        hidden: usize,
        depth: usize,
        base_relations: usize,
        num_bases: Option<usize>,
        rng: &mut impl Rng,
    ) -> Self {
        let r = 2 * base_relations;
        let layers = (0..depth)
            .map(|_| RelConvLayer {
                self_weight: xavier(hidden, hidden, rng),
                bias: Vector::zeros(hidden),
                relations: match num_bases {
                    None => RelationWeights::Full((0..r).map(|_| xavier(hidden, hidden, rng)).collect()),
                    Some(b) => RelationWeights::Basis {
                        bases: (0..b).map(|_| xavier(hidden, hidden, rng)).collect(),
                        coefficients: xavier(r, b, rng),
                    },
                },
            })
            .collect();
        RelConv { layers, base_relations }
    }

    pub fn zeros(hidden: usize, depth: usize, base_relations: usize, num_bases: Option<usize>) -> Self {
        let r = 2 * base_relations;
        let layers = (0..depth)
            .map(|_| RelConvLayer {
                self_weight: Matrix::zeros((hidden, hidden)),
                bias: Vector::zeros(hidden),
                relations: match num_bases {
                    None => RelationWeights::Full((0..r).map(|_| Matrix::zeros((hidden, hidden))).collect()),
                    Some(b) => RelationWeights::Basis {
                        bases: (0..b).map(|_| Matrix::zeros((hidden, hidden))).collect(),
                        coefficients: Matrix::zeros((r, b)),
                    },
                },
            })
            .collect();
        RelConv { layers, base_relations }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| {
                l.self_weight.len()
                    + l.bias.len()
                    + l.relations.tensors().iter().map(|(_, m)| m.len()).sum::<usize>()
            })
            .sum()
    }

    pub fn forward(&self, features: &Matrix, edges: &[RelEdge]) -> Result<Matrix, ModelError> {
        Ok(self.forward_cached(features, edges)?.0)
    }

    pub fn forward_cached(&self, features: &Matrix, edges: &[RelEdge]) -> Result<(Matrix, ConvCache), ModelError> {
        let msgs = messages(features.nrows(), edges, self.base_relations)?;
        let mut h = features.clone();
        let mut inputs = Vec::with_capacity(self.depth());
        let mut pre = Vec::with_capacity(self.depth());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = h.dot(&layer.self_weight.t()) + &layer.bias;
            for r in used_relations(&msgs) {
                let w = layer.relations.matrix(r);
                for m in msgs.iter().filter(|m| m.rel == r) {
                    let msg = w.dot(&h.row(m.source));
                    out.row_mut(m.target).scaled_add(m.norm, &msg);
                }
            }
            inputs.push(h);
            h = if l + 1 < self.depth() {
                out.mapv(|x| x.max(0.0))
            } else {
                out.clone()
            };
            pre.push(out);
        }
        Ok((
            h,
            ConvCache {
                inputs,
                pre,
                messages: msgs,
            },
        ))
    }

    /// Accumulate parameter gradients; returns `dL/d(features)`.
    pub fn backward(&self, cache: &ConvCache, dout: &Matrix, grad: &mut RelConv) -> Matrix {
        let mut d = dout.clone();
        for l in (0..self.depth()).rev() {
            let layer = &self.layers[l];
            let glayer = &mut grad.layers[l];
            if l + 1 < self.depth() {
                d.zip_mut_with(&cache.pre[l], |g, &p| {
                    if p <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            let h = &cache.inputs[l];
            glayer.self_weight += &d.t().dot(h);
            glayer.bias += &d.sum_axis(Axis(0));
            let mut dh = d.dot(&layer.self_weight);
            for r in used_relations(&cache.messages) {
                let w = layer.relations.matrix(r);
                let mut gw = Matrix::zeros(w.raw_dim());
                for m in cache.messages.iter().filter(|m| m.rel == r) {
                    let dt = d.row(m.target);
                    outer_add(&mut gw, m.norm, dt, h.row(m.source));
                    let back = w.t().dot(&dt);
                    dh.row_mut(m.source).scaled_add(m.norm, &back);
                }
                layer.relations.accumulate(r, &gw, &mut glayer.relations);
            }
            d = dh;
        }
        d
    }
}

fn used_relations(msgs: &[Message]) -> Vec<usize> {
    let mut rs: Vec<usize> = msgs.iter().map(|m| m.rel).collect();
    rs.sort_unstable();
    rs.dedup();
    rs
}
