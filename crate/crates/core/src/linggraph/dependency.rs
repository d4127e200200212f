use std::collections::BTreeSet;

use super::{join_sentence_graphs, Formalism, GraphError, GraphNode, LinguisticGraph, NodeKind, TypedEdge};

/// One parsed sentence: 1-based heads, 0 marking the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceParse {
    pub words: Vec<String>,
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
}

fn sentence_graph(index: usize, parse: &SentenceParse, token_offset: usize) -> Result<LinguisticGraph, GraphError> {
    let n = parse.words.len();
    if parse.heads.len() != n || parse.labels.len() != n {
        return Err(GraphError::BadParse {
            sentence: index,
            message: format!(
                "{} words, {} heads, {} labels",
                n,
                parse.heads.len(),
                parse.labels.len()
            ),
        });
    }
    for &h in &parse.heads {
        if h > n {
            return Err(GraphError::HeadOutOfRange {
                sentence: index,
                head: h,
                words: n,
            });
        }
    }
    // every word must reach a root by following heads
    for start in 0..n {
        let mut seen = vec![false; n];
        let mut w = start;
        loop {
            if seen[w] {
                return Err(GraphError::Cycle { sentence: index, word: w + 1 });
            }
            seen[w] = true;
            match parse.heads[w] {
                0 => break,
                h => w = h - 1,
            }
        }
    }
    let mut g = LinguisticGraph::empty(Formalism::Dependency);
    for (i, word) in parse.words.iter().enumerate() {
        g.nodes.push(GraphNode {
            id: i,
            label: word.clone(),
            kind: NodeKind::Word,
        });
        g.alignments.insert(i, BTreeSet::from([token_offset + i]));
        match parse.heads[i] {
            0 => g.roots.push(i),
            h => g.edges.push(TypedEdge {
                src: h - 1,
                dst: i,
                rel: parse.labels[i].clone(),
            }),
        }
    }
    Ok(g)
}

/// Build a per-context dependency graph from per-sentence parses.
///
/// Word `i` of a sentence aligns to context token `offset + i`, where the
/// offset counts the words of all preceding sentences.
pub fn build_dependency_graph(sentences: &[SentenceParse]) -> Result<LinguisticGraph, GraphError> {
    let mut offset = 0;
    let mut graphs = Vec::with_capacity(sentences.len());
    for (i, s) in sentences.iter().enumerate() {
        graphs.push(sentence_graph(i, s, offset)?);
        offset += s.words.len();
    }
    let mut joined = join_sentence_graphs(Formalism::Dependency, &graphs)?;
    joined.tokens = sentences.iter().flat_map(|s| s.words.iter().cloned()).collect();
    Ok(joined)
}

/// Parse CoNLL-U text. Comment lines, multiword-token ranges and empty
/// nodes are skipped.
pub fn parse_conllu(text: &str) -> Result<Vec<SentenceParse>, GraphError> {
    let mut out = Vec::new();
    let mut cur = SentenceParse {
        words: Vec::new(),
        heads: Vec::new(),
        labels: Vec::new(),
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            if !cur.words.is_empty() {
                out.push(std::mem::replace(
                    &mut cur,
                    SentenceParse {
                        words: Vec::new(),
                        heads: Vec::new(),
                        labels: Vec::new(),
                    },
                ));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(GraphError::Format {
                path: format!("line {}", lineno + 1),
                message: format!("expected 10 tab-separated columns, got {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let head = cols[6].parse::<usize>().map_err(|_| GraphError::Format {
            path: format!("line {}", lineno + 1),
            message: format!("bad head {:?}", cols[6]),
        })?;
        cur.words.push(cols[1].to_string());
        cur.heads.push(head);
        cur.labels.push(cols[7].to_string());
    }
    if !cur.words.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linggraph::TOP_LINK;

    fn parse(words: &[&str], heads: &[usize]) -> SentenceParse {
        SentenceParse {
            words: words.iter().map(|s| s.to_string()).collect(),
            heads: heads.to_vec(),
            labels: heads.iter().map(|&h| if h == 0 { "root" } else { "dep" }.to_string()).collect(),
        }
    }

    #[test]
    fn four_word_sentence() {
        let g = build_dependency_graph(&[parse(&["Boil", "the", "water", "now"], &[2, 0, 2, 3])]).unwrap();
        assert_eq!(g.num_nodes(), 5);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(g.edges.iter().filter(|e| e.rel == TOP_LINK).count(), 1);
        g.validate(Some(4)).unwrap();
    }

    #[test]
    fn two_sentences_align_to_context_tokens() {
        let g = build_dependency_graph(&[parse(&["a", "b", "c"], &[0, 1, 1]), parse(&["d", "e", "f"], &[2, 0, 2])])
            .unwrap();
        assert_eq!(g.num_nodes(), 7);
        // node ids shift by one for the top; second sentence tokens start at 3
        assert_eq!(g.alignments[&4], BTreeSet::from([3]));
        g.validate(Some(6)).unwrap();
    }

    #[test]
    fn cycles_and_bad_heads() {
        assert!(matches!(
            build_dependency_graph(&[parse(&["a", "b"], &[2, 1])]),
            Err(GraphError::Cycle { .. })
        ));
        assert!(matches!(
            build_dependency_graph(&[parse(&["a", "b"], &[0, 5])]),
            Err(GraphError::HeadOutOfRange { head: 5, .. })
        ));
    }

    #[test]
    fn conllu_reader() {
        let text = "# sent_id = 1\n\
                    1\tBoil\tboil\tVERB\t_\t_\t0\troot\t_\t_\n\
                    2-3\tthe\t_\t_\t_\t_\t_\t_\t_\t_\n\
                    2\tthe\tthe\tDET\t_\t_\t3\tdet\t_\t_\n\
                    3\twater\twater\tNOUN\t_\t_\t1\tobj\t_\t_\n\
                    \n\
                    1\tStir\tstir\tVERB\t_\t_\t0\troot\t_\t_\n";
        let parses = parse_conllu(text).unwrap();
        assert_eq!(parses.len(), 2);
        assert_eq!(parses[0].heads, vec![0, 3, 1]);
        assert_eq!(parses[0].labels[2], "obj");
    }
}
