//! Dependency and AMR graphs under one representation.
//!
//! Per-sentence graphs are joined into one per-context graph under a
//! synthetic top node, linked to every sentence root by a [`TOP_LINK`] edge.
//! Node ids are dense indices; alignments map node ids to word-token indices
//! of the context (see [`crate::corpus::tokenize_words`]).

mod amr;
mod dependency;
mod io;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use amr::{amr_context_graph, read_amr_corpus, read_amr_document, read_amr_serialization, AmrGraph};
pub use dependency::{build_dependency_graph, parse_conllu, SentenceParse};
pub use io::{graphs_from_parses, read_graph_file, write_graph_file, GraphFile};

/// Edge label linking the top node to each sentence root.
pub const TOP_LINK: &str = ":top-link";
pub const TOP_LABEL: &str = "<top>";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("AMR parse error at line {line}, column {column} (byte {position}): {message}")]
    AmrParse {
        position: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cannot join graphs of different formalisms ({0:?} and {1:?})")]
    MixedFormalisms(Formalism, Formalism),
    #[error("sentence {sentence}: head index {head} out of range for {words} words")]
    HeadOutOfRange { sentence: usize, head: usize, words: usize },
    #[error("sentence {sentence}: head assignment contains a cycle through word {word}")]
    Cycle { sentence: usize, word: usize },
    #[error("sentence {sentence}: {message}")]
    BadParse { sentence: usize, message: String },
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    Dependency,
    Amr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Word,
    Concept,
    Top,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub label: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedEdge {
    pub src: usize,
    pub dst: usize,
    pub rel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinguisticGraph {
    pub formalism: Formalism,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<TypedEdge>,
    #[serde(default)]
    pub alignments: BTreeMap<usize, BTreeSet<usize>>,
    #[serde(default)]
    pub parseless: bool,
    /// Explicit roots; empty means "derive" (see [`LinguisticGraph::roots`]).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roots: Vec<usize>,
    /// Word tokens of the context, when known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
}

impl LinguisticGraph {
    pub fn empty(formalism: Formalism) -> Self {
        LinguisticGraph {
            formalism,
            nodes: Vec::new(),
            edges: Vec::new(),
            alignments: BTreeMap::new(),
            parseless: false,
            roots: Vec::new(),
            tokens: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn top(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == NodeKind::Top)
    }

    /// Root nodes: the explicit list, else the top node, else every node
    /// without incoming edges (falling back to node 0).
    pub fn roots(&self) -> Vec<usize> {
        if !self.roots.is_empty() {
            return self.roots.clone();
        }
        if let Some(t) = self.top() {
            return vec![t];
        }
        let mut has_parent = vec![false; self.nodes.len()];
        for e in &self.edges {
            has_parent[e.dst] = true;
        }
        let roots: Vec<usize> = (0..self.nodes.len()).filter(|&i| !has_parent[i]).collect();
        if roots.is_empty() && !self.nodes.is_empty() {
            vec![0]
        } else {
            roots
        }
    }

    pub fn aligned_tokens(&self, node: usize) -> Option<&BTreeSet<usize>> {
        self.alignments.get(&node).filter(|s| !s.is_empty())
    }

    /// Nodes whose alignment intersects `tokens`.
    pub fn nodes_for_tokens(&self, tokens: &[usize]) -> Vec<usize> {
        self.alignments
            .iter()
            .filter(|(_, toks)| tokens.iter().any(|t| toks.contains(t)))
            .map(|(&n, _)| n)
            .collect()
    }

    pub fn relation_labels(&self) -> BTreeSet<String> {
        self.edges.iter().map(|e| e.rel.clone()).collect()
    }

    /// Check structural invariants; `token_count` bounds alignment indices.
    pub fn validate(&self, token_count: Option<usize>) -> Result<(), GraphError> {
        let invalid = |m: String| Err(GraphError::Invalid(m));
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return invalid(format!("node at position {i} has id {}", n.id));
            }
        }
        let tops = self.nodes.iter().filter(|n| n.kind == NodeKind::Top).count();
        if tops > 1 {
            return invalid(format!("{tops} top nodes"));
        }
        for e in &self.edges {
            if e.src >= self.nodes.len() || e.dst >= self.nodes.len() {
                return invalid(format!("edge {}->{} has a missing endpoint", e.src, e.dst));
            }
            if e.rel.is_empty() {
                return invalid(format!("edge {}->{} has an empty relation", e.src, e.dst));
            }
            if e.src == e.dst {
                return invalid(format!("self-loop on node {}", e.src));
            }
        }
        for (&node, toks) in &self.alignments {
            if node >= self.nodes.len() {
                return invalid(format!("alignment for missing node {node}"));
            }
            if self.nodes[node].kind == NodeKind::Top && !toks.is_empty() {
                return invalid("top node is aligned".into());
            }
            if let (Some(limit), Some(&max)) = (token_count, toks.iter().next_back()) {
                if max >= limit {
                    return invalid(format!("node {node} aligned to token {max} of {limit}"));
                }
            }
        }
        if self.formalism == Formalism::Dependency {
            for n in &self.nodes {
                if n.kind == NodeKind::Word && self.alignments.get(&n.id).map_or(0, |s| s.len()) != 1 {
                    return invalid(format!("dependency word node {} must align to one token", n.id));
                }
            }
        }
        Ok(())
    }

    /// Remove the top node and its links; the former top's children become
    /// the explicit roots.
    pub fn strip_top(&self) -> LinguisticGraph {
        let Some(top) = self.top() else {
            return self.clone();
        };
        let remap = |i: usize| if i > top { i - 1 } else { i };
        let nodes = self
            .nodes
            .iter()
            .filter(|n| n.id != top)
            .map(|n| GraphNode {
                id: remap(n.id),
                ..n.clone()
            })
            .collect();
        let roots = self.edges.iter().filter(|e| e.src == top).map(|e| remap(e.dst)).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| e.src != top && e.dst != top)
            .map(|e| TypedEdge {
                src: remap(e.src),
                dst: remap(e.dst),
                rel: e.rel.clone(),
            })
            .collect();
        let alignments = self
            .alignments
            .iter()
            .filter(|(&n, _)| n != top)
            .map(|(&n, t)| (remap(n), t.clone()))
            .collect();
        LinguisticGraph {
            formalism: self.formalism,
            nodes,
            edges,
            alignments,
            parseless: self.parseless,
            roots,
            tokens: self.tokens.clone(),
        }
    }
}

/// Join sentence graphs under a fresh top node (id 0).
///
/// An empty list yields a top-only graph flagged `parseless`.
pub fn join_sentence_graphs(
    formalism: Formalism,
    graphs: &[LinguisticGraph],
) -> Result<LinguisticGraph, GraphError> {
    let mut out = LinguisticGraph::empty(formalism);
    out.nodes.push(GraphNode {
        id: 0,
        label: TOP_LABEL.into(),
        kind: NodeKind::Top,
    });
    for g in graphs {
        if g.formalism != formalism {
            return Err(GraphError::MixedFormalisms(formalism, g.formalism));
        }
        if g.top().is_some() {
            return Err(GraphError::Invalid(
                "sentence graph already has a top node; strip it before joining".into(),
            ));
        }
        let offset = out.nodes.len();
        let roots = g.roots();
        out.nodes.extend(g.nodes.iter().map(|n| GraphNode {
            id: n.id + offset,
            ..n.clone()
        }));
        out.edges.extend(roots.iter().map(|&r| TypedEdge {
            src: 0,
            dst: r + offset,
            rel: TOP_LINK.into(),
        }));
        out.edges.extend(g.edges.iter().map(|e| TypedEdge {
            src: e.src + offset,
            dst: e.dst + offset,
            rel: e.rel.clone(),
        }));
        for (&n, toks) in &g.alignments {
            out.alignments.insert(n + offset, toks.clone());
        }
    }
    out.parseless = graphs.is_empty();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLength {
    Hops(usize),
    Unreachable,
}

/// Shortest undirected path between any node aligned to `e1_tokens` and any
/// node aligned to `e2_tokens`.
pub fn entity_path_stats(graph: &LinguisticGraph, e1_tokens: &[usize], e2_tokens: &[usize]) -> PathLength {
    let sources = graph.nodes_for_tokens(e1_tokens);
    let targets: BTreeSet<usize> = graph.nodes_for_tokens(e2_tokens).into_iter().collect();
    if sources.is_empty() || targets.is_empty() {
        return PathLength::Unreachable;
    }
    let mut adj = vec![Vec::new(); graph.nodes.len()];
    for e in &graph.edges {
        adj[e.src].push(e.dst);
        adj[e.dst].push(e.src);
    }
    let mut dist = vec![usize::MAX; graph.nodes.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        if targets.contains(&u) {
            return PathLength::Hops(dist[u]);
        }
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    PathLength::Unreachable
}

/// Mean over reachable pairs; `None` when nothing is reachable.
pub fn mean_path_length(lengths: impl IntoIterator<Item = PathLength>) -> Option<f64> {
    let (sum, n) = lengths.into_iter().fold((0usize, 0usize), |(s, n), p| match p {
        PathLength::Hops(h) => (s + h, n + 1),
        PathLength::Unreachable => (s, n),
    });
    (n > 0).then(|| sum as f64 / n as f64)
}

/// Sorted union of edge labels over `graphs`, always including [`TOP_LINK`].
pub fn relation_vocabulary<'a>(graphs: impl IntoIterator<Item = &'a LinguisticGraph>) -> Vec<String> {
    let mut labels: BTreeSet<String> = BTreeSet::new();
    labels.insert(TOP_LINK.to_string());
    for g in graphs {
        labels.extend(g.relation_labels());
    }
    labels.into_iter().collect()
}
