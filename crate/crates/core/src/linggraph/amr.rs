//! Reader for the parenthesized (PENMAN) AMR notation.
//!
//! Surface alignment markers (`boil-01~e.0`, `"Paris"~e.3,4`) are stripped
//! from labels and returned as node alignments relative to the sentence.

use std::collections::{BTreeMap, BTreeSet};

use super::{join_sentence_graphs, Formalism, GraphError, GraphNode, LinguisticGraph, NodeKind, TypedEdge};

/// A single parsed AMR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<TypedEdge>,
    /// Variable name to node id. The outermost variable is node 0.
    pub variables: BTreeMap<String, usize>,
    /// Alignments given inline with `~e.N` markers.
    pub surface_alignments: BTreeMap<usize, BTreeSet<usize>>,
}

impl AmrGraph {
    /// Sentence-level graph rooted at node 0, with inline alignments
    /// shifted by `token_offset`.
    pub fn into_sentence_graph(self, token_offset: usize) -> LinguisticGraph {
        let mut g = LinguisticGraph::empty(Formalism::Amr);
        g.nodes = self.nodes;
        g.edges = self.edges;
        g.roots = vec![0];
        g.alignments = self
            .surface_alignments
            .into_iter()
            .map(|(n, toks)| (n, toks.into_iter().map(|t| t + token_offset).collect()))
            .collect();
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Sym(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn error(&self, position: usize, message: impl Into<String>) -> GraphError {
        let before = &self.src[..position.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        GraphError::AmrParse {
            position,
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            let c = bytes[self.pos];
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' && (self.pos == 0 || bytes[self.pos - 1] == b'\n') {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, GraphError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        let tok = match c {
            '(' => {
                self.pos += 1;
                Tok::Open
            }
            ')' => {
                self.pos += 1;
                Tok::Close
            }
            '/' => {
                self.pos += 1;
                Tok::Slash
            }
            '"' => {
                let mut out = String::from('"');
                let mut escaped = false;
                let mut end = None;
                for (i, ch) in rest.char_indices().skip(1) {
                    if escaped {
                        out.push(ch);
                        escaped = false;
                    } else if ch == '\\' {
                        escaped = true;
                    } else if ch == '"' {
                        out.push('"');
                        end = Some(i + 1);
                        break;
                    } else {
                        out.push(ch);
                    }
                }
                let end = end.ok_or_else(|| self.error(start, "unterminated string"))?;
                self.pos += end;
                // alignment marker may follow a closing quote
                let marker = self.take_symbol_chars();
                out.push_str(&marker);
                Tok::Str(out)
            }
            ':' => {
                let sym = self.take_symbol_chars();
                if sym.len() < 2 {
                    return Err(self.error(start, "empty role"));
                }
                Tok::Role(sym)
            }
            _ => Tok::Sym(self.take_symbol_chars()),
        };
        Ok(Some((start, tok)))
    }

    fn take_symbol_chars(&mut self) -> String {
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == '"')
            .unwrap_or(rest.len());
        // a '/' is a separator only when standing alone
        self.pos += len;
        rest[..len].to_string()
    }
}

fn split_alignment(label: &str) -> (String, BTreeSet<usize>) {
    if let Some((base, marker)) = label.rsplit_once('~') {
        let digits = marker.trim_start_matches(|c: char| c.is_ascii_alphabetic()).trim_start_matches('.');
        let toks: Option<BTreeSet<usize>> = digits.split(',').map(|d| d.parse().ok()).collect();
        if let Some(toks) = toks {
            return (base.to_string(), toks);
        }
    }
    (label.to_string(), BTreeSet::new())
}

fn looks_like_variable(sym: &str) -> bool {
    let letters = sym.chars().take_while(|c| c.is_ascii_lowercase()).count();
    (1..=2).contains(&letters) && sym[letters..].chars().all(|c| c.is_ascii_digit())
}

enum Target {
    Node(usize),
    Symbol(String, usize),
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(usize, Tok)>,
    graph: AmrGraph,
    pending: Vec<(usize, String, Target)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&(usize, Tok)>, GraphError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn bump(&mut self) -> Result<Option<(usize, Tok)>, GraphError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lexer.next(),
        }
    }

    fn eof_error(&self) -> GraphError {
        self.lexer.error(self.lexer.src.len(), "unexpected end of input (unbalanced parentheses?)")
    }

    fn add_node(&mut self, raw_label: &str, kind: NodeKind) -> usize {
        let (label, toks) = split_alignment(raw_label);
        let id = self.graph.nodes.len();
        self.graph.nodes.push(GraphNode { id, label, kind });
        if !toks.is_empty() {
            self.graph.surface_alignments.insert(id, toks);
        }
        id
    }

    fn parse_node(&mut self) -> Result<usize, GraphError> {
        match self.bump()? {
            Some((_, Tok::Open)) => {}
            Some((p, t)) => return Err(self.lexer.error(p, format!("expected '(' but found {t:?}"))),
            None => return Err(self.eof_error()),
        }
        let (var_pos, var) = match self.bump()? {
            Some((p, Tok::Sym(s))) => (p, s),
            Some((p, t)) => return Err(self.lexer.error(p, format!("expected variable but found {t:?}"))),
            None => return Err(self.eof_error()),
        };
        let (var, _) = split_alignment(&var);
        match self.bump()? {
            Some((_, Tok::Slash)) => {}
            Some((p, t)) => return Err(self.lexer.error(p, format!("expected '/' but found {t:?}"))),
            None => return Err(self.eof_error()),
        }
        let concept = match self.bump()? {
            Some((_, Tok::Sym(s))) | Some((_, Tok::Str(s))) => s,
            Some((p, t)) => return Err(self.lexer.error(p, format!("expected concept but found {t:?}"))),
            None => return Err(self.eof_error()),
        };
        if self.graph.variables.contains_key(&var) {
            return Err(self.lexer.error(var_pos, format!("variable {var} defined twice")));
        }
        let id = self.add_node(&concept, NodeKind::Concept);
        self.graph.variables.insert(var, id);
        loop {
            match self.bump()? {
                Some((_, Tok::Close)) => return Ok(id),
                Some((_, Tok::Role(role))) => {
                    let (role, _) = split_alignment(&role);
                    let target = match self.peek()? {
                        Some((_, Tok::Open)) => Target::Node(self.parse_node()?),
                        Some(_) => match self.bump()? {
                            Some((_, Tok::Str(s))) => Target::Node(self.add_node(&s, NodeKind::Concept)),
                            Some((p, Tok::Sym(s))) => {
                                let (bare, _) = split_alignment(&s);
                                if bare.parse::<f64>().is_ok() {
                                    Target::Node(self.add_node(&s, NodeKind::Concept))
                                } else {
                                    Target::Symbol(s, p)
                                }
                            }
                            Some((p, t)) => {
                                return Err(self.lexer.error(p, format!("expected role value but found {t:?}")))
                            }
                            None => return Err(self.eof_error()),
                        },
                        None => return Err(self.eof_error()),
                    };
                    self.pending.push((id, role, target));
                }
                Some((p, t)) => return Err(self.lexer.error(p, format!("expected role or ')' but found {t:?}"))),
                None => return Err(self.eof_error()),
            }
        }
    }
}

/// Parse one single-rooted AMR. Comment lines (`# ...`) are ignored.
pub fn read_amr_serialization(text: &str) -> Result<AmrGraph, GraphError> {
    let mut parser = Parser {
        lexer: Lexer { src: text, pos: 0 },
        peeked: None,
        graph: AmrGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            variables: BTreeMap::new(),
            surface_alignments: BTreeMap::new(),
        },
        pending: Vec::new(),
    };
    parser.parse_node()?;
    if let Some((p, t)) = parser.bump()? {
        return Err(parser.lexer.error(p, format!("trailing content after the root: {t:?}")));
    }
    let pending = std::mem::take(&mut parser.pending);
    for (src, rel, target) in pending {
        let dst = match target {
            Target::Node(n) => n,
            Target::Symbol(sym, pos) => {
                let (bare, _) = split_alignment(&sym);
                if let Some(&n) = parser.graph.variables.get(&bare) {
                    n
                } else if looks_like_variable(&bare) {
                    return Err(parser.lexer.error(pos, format!("dangling variable {bare}")));
                } else {
                    parser.add_node(&sym, NodeKind::Concept)
                }
            }
        };
        parser.graph.edges.push(TypedEdge { src, dst, rel });
    }
    Ok(parser.graph)
}

/// Split a multi-graph file on blank lines and parse each block. Each entry
/// keeps the `# ::key value` metadata of its block.
pub fn read_amr_document(text: &str) -> Vec<(BTreeMap<String, String>, Result<AmrGraph, GraphError>)> {
    let mut out = Vec::new();
    for block in text.split("\n\n").map(str::trim).filter(|b| !b.is_empty()) {
        let mut meta = BTreeMap::new();
        for line in block.lines().filter(|l| l.starts_with('#')) {
            for field in line.trim_start_matches('#').split(" ::").skip(1) {
                let field = field.trim();
                let (k, v) = field.split_once(' ').unwrap_or((field, ""));
                meta.insert(k.to_string(), v.trim().to_string());
            }
        }
        let body_is_empty = block.lines().all(|l| l.starts_with('#') || l.trim().is_empty());
        let parsed = if body_is_empty {
            Err(GraphError::AmrParse {
                position: 0,
                line: 1,
                column: 1,
                message: "no graph in block".into(),
            })
        } else {
            read_amr_serialization(block)
        };
        out.push((meta, parsed));
    }
    out
}

/// Read a multi-graph AMR file into single-sentence context graphs keyed
/// by `# ::id`, with words from `# ::tok` and inline alignments. Blocks that
/// fail to parse, or lack an id, are an error.
pub fn read_amr_corpus(text: &str) -> Result<BTreeMap<String, LinguisticGraph>, GraphError> {
    let mut out = BTreeMap::new();
    for (i, (meta, parsed)) in read_amr_document(text).into_iter().enumerate() {
        let id = meta.get("id").cloned().ok_or_else(|| GraphError::Format {
            path: format!("block {}", i + 1),
            message: "missing # ::id".into(),
        })?;
        let mut g = join_sentence_graphs(Formalism::Amr, &[parsed?.into_sentence_graph(0)])?;
        if let Some(tok) = meta.get("tok") {
            g.tokens = tok.split_whitespace().map(String::from).collect();
        }
        out.insert(id, g);
    }
    Ok(out)
}

/// Compose a context graph from per-sentence AMR strings. Sentences whose
/// parse is missing or invalid are skipped; if none survive the result is a
/// parseless top-only graph.
pub fn amr_context_graph(
    sentences: &[Option<&str>],
    sentence_token_offsets: &[usize],
) -> Result<LinguisticGraph, GraphError> {
    let mut graphs = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        let Some(s) = s else { continue };
        if let Ok(g) = read_amr_serialization(s) {
            graphs.push(g.into_sentence_graph(sentence_token_offsets.get(i).copied().unwrap_or(0)));
        }
    }
    join_sentence_graphs(Formalism::Amr, &graphs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_nodes_one_edge() {
        let g = read_amr_serialization("(b / boil-01 :ARG1 (m / mixture))").unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].rel, ":ARG1");
        assert_eq!(g.nodes[0].label, "boil-01");
        assert_eq!(g.variables["m"], 1);
    }

    #[test]
    fn reentrancy_shares_nodes() {
        let g = read_amr_serialization("(a / add-01 :ARG1 (s / salt) :location (p / pan :part-of s))").unwrap();
        assert_eq!(g.nodes.len(), 3);
        let s = g.variables["s"];
        assert_eq!(g.edges.iter().filter(|e| e.dst == s).count(), 2);
    }

    #[test]
    fn malformed_input() {
        let err = read_amr_serialization("(b / boil-01").unwrap_err();
        assert!(matches!(err, GraphError::AmrParse { .. }));
        let err = read_amr_serialization("(b / boil-01 :ARG1 x)").unwrap_err();
        match err {
            GraphError::AmrParse { position, message, .. } => {
                assert_eq!(position, 19);
                assert!(message.contains("dangling"));
            }
            e => panic!("{e:?}"),
        }
        assert!(read_amr_serialization("(b / boil-01) (c / cook-01)").is_err());
    }

    #[test]
    fn constants_become_concept_nodes() {
        let g = read_amr_serialization(
            r#"(h / heat-01 :mode imperative :polarity - :ARG1 (w / water) :duration (t / temporal-quantity :quant 5 :unit (m / minute)) :name (n / name :op1 "Pyrex"))"#,
        )
        .unwrap();
        let labels: Vec<&str> = g.nodes.iter().map(|n| n.label.as_str()).collect();
        assert!(labels.contains(&"5"));
        assert!(labels.contains(&"\"Pyrex\""));
        assert!(labels.contains(&"imperative"));
        assert!(labels.contains(&"-"));
        assert!(g.nodes.iter().all(|n| n.kind == NodeKind::Concept));
        assert_eq!(g.edges.len(), 8);
    }

    #[test]
    fn inverse_roles_kept_verbatim() {
        let g = read_amr_serialization("(p / pot :ARG1-of (b / boil-01))").unwrap();
        assert_eq!(g.edges[0], TypedEdge { src: 0, dst: 1, rel: ":ARG1-of".into() });
    }

    #[test]
    fn inline_alignments() {
        let g = read_amr_serialization(r#"(b / boil-01~e.0 :ARG1 (w / water~e.2) :name (n / name :op1 "Nile"~e.4,5))"#)
            .unwrap();
        assert_eq!(g.nodes[0].label, "boil-01");
        assert_eq!(g.surface_alignments[&0], BTreeSet::from([0]));
        assert_eq!(g.surface_alignments[&1], BTreeSet::from([2]));
        assert_eq!(g.surface_alignments[&3], BTreeSet::from([4, 5]));
        assert_eq!(g.nodes[3].label, "\"Nile\"");
    }

    #[test]
    fn document_with_metadata_and_failed_block() {
        let doc = "# ::id s1 ::snt Boil water.\n(b / boil-01 :ARG1 (w / water))\n\n# ::id s2\n# failed\n";
        let parsed = read_amr_document(doc);
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].0["id"], "s1");
        assert_eq!(parsed[0].0["snt"], "Boil water.");
        assert!(parsed[0].1.is_ok());
        assert!(parsed[1].1.is_err());
    }

    #[test]
    fn context_graph_tolerates_missing_parses() {
        let g = amr_context_graph(&[None, Some("(b / boil-01)"), Some("(broken")], &[0, 3, 6]).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert!(!g.parseless);
        let none = amr_context_graph(&[None, Some("(broken")], &[0, 2]).unwrap();
        assert!(none.parseless);
        assert_eq!(none.num_nodes(), 1);
    }
}
