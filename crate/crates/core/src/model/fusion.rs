use super::layers::{Matrix, Vector};
use super::ModelError;

/// Elementwise max over `rows` of `m`, with the winning row per column.
pub(crate) fn max_pool(m: &Matrix, rows: &[usize]) -> (Vector, Vec<usize>) {
    let mut out = Vector::from_elem(m.ncols(), f64::NEG_INFINITY);
    let mut arg = vec![rows[0]; m.ncols()];
    for &r in rows {
        for (k, &x) in m.row(r).iter().enumerate() {
            if x > out[k] {
                out[k] = x;
                arg[k] = r;
            }
        }
    }
    (out, arg)
}

/// Max-pool the embeddings of an entity's tokens.
pub fn pool_entity(tokens: &Matrix, span: &[usize], instance: &str) -> Result<Vector, ModelError> {
    if span.is_empty() {
        return Err(ModelError::Truncation {
            instance: instance.to_string(),
        });
    }
    Ok(max_pool(tokens, span).0)
}

/// Node features: max over each node's aligned tokens, zero when unaligned.
/// Returns the winning token per column for aligned nodes.
pub fn init_node_features(tokens: &Matrix, node_tokens: &[Vec<usize>]) -> (Matrix, Vec<Option<Vec<usize>>>) {
    let mut x = Matrix::zeros((node_tokens.len(), tokens.ncols()));
    let mut args = Vec::with_capacity(node_tokens.len());
    for (n, toks) in node_tokens.iter().enumerate() {
        if toks.is_empty() {
            args.push(None);
            continue;
        }
        let (v, a) = max_pool(tokens, toks);
        x.row_mut(n).assign(&v);
        args.push(Some(a));
    }
    (x, args)
}

/// Nodes whose aligned tokens intersect `entity`.
pub fn entity_nodes(node_tokens: &[Vec<usize>], entity: &[usize]) -> Vec<usize> {
    node_tokens
        .iter()
        .enumerate()
        .filter(|(_, toks)| toks.iter().any(|t| entity.contains(t)))
        .map(|(n, _)| n)
        .collect()
}

/// Entity tokens that are aligned to one of `nodes`.
pub fn aligned_entity_tokens(node_tokens: &[Vec<usize>], nodes: &[usize], entity: &[usize]) -> Vec<usize> {
    entity
        .iter()
        .copied()
        .filter(|t| nodes.iter().any(|&n| node_tokens[n].contains(t)))
        .collect()
}

/// Mean of the selected node rows; zero for an empty selection.
pub fn mean_nodes(nodes_emb: &Matrix, nodes: &[usize]) -> Vector {
    let mut v = Vector::zeros(nodes_emb.ncols());
    if nodes.is_empty() {
        return v;
    }
    for &n in nodes {
        v += &nodes_emb.row(n);
    }
    v / nodes.len() as f64
}

/// Add each entity's mean node embedding to that entity's aligned tokens.
pub fn residual_fuse(
    tokens: &Matrix,
    node_emb: &Matrix,
    e1_nodes: &[usize],
    e2_nodes: &[usize],
    e1_tokens: &[usize],
    e2_tokens: &[usize],
) -> Matrix {
    let mut out = tokens.clone();
    for (nodes, toks) in [(e1_nodes, e1_tokens), (e2_nodes, e2_tokens)] {
        if nodes.is_empty() {
            continue;
        }
        let m = mean_nodes(node_emb, nodes);
        for &t in toks {
            let mut row = out.row_mut(t);
            row += &m;
        }
    }
    out
}
